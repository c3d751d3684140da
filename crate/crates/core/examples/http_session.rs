//! Drives the HTTP API in process: opens a session, types a sentence token
//! by token, asks for options and adds a word.
//!
//! ```text
//! cargo run --example http_session
//! ```

use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request};
use codeco::grammar::parse_grammar;
use codeco::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (u16, Value) {
    let request = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let request = match body {
        Some(b) => request.body(Body::from(b.to_string())).unwrap(),
        None => request.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() {
    let state = AppState::new(Duration::from_secs(600));
    state.add_grammar("demo", parse_grammar(include_str!("../grammars/demo.codeco")).unwrap());
    let app = router(state);

    let (_, created) = call(&app, Method::POST, "/sessions", Some(json!({"grammarId": "demo"}))).await;
    let id = created["sessionId"].as_str().unwrap().to_owned();
    println!("session {id}");

    for token in ["john", "helps"] {
        let (code, state) =
            call(&app, Method::POST, &format!("/sessions/{id}/tokens"), Some(json!({"token": token}))).await;
        println!("+{token}: {code} {}", state["status"]);
    }
    let (_, options) = call(&app, Method::GET, &format!("/sessions/{id}/options"), None).await;
    let words: Vec<&str> =
        options["concrete"].as_array().unwrap().iter().map(|c| c["surface"].as_str().unwrap()).collect();
    println!("options: {}", words.join(" "));

    let word =
        json!({"preterminal": "prop", "features": {"text": "sue", "human": "+", "gender": "fem"}, "surface": "sue"});
    let (code, added) = call(&app, Method::POST, "/grammar/demo/lexicon", Some(word)).await;
    println!("lexicon: {code} {added}");

    for token in ["sue", "."] {
        let (code, state) =
            call(&app, Method::POST, &format!("/sessions/{id}/tokens"), Some(json!({"token": token}))).await;
        println!("+{token}: {code} {}", state["status"]);
    }
    let (_, tree) = call(&app, Method::GET, &format!("/sessions/{id}/tree"), None).await;
    println!("tree: {}", tree["text"]);
}
