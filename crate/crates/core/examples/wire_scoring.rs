//! Score a batch through an out-of-process scorer over the line-delimited JSON
//! protocol. The endpoint here answers in reverse order; responses are matched by id.

use std::error::Error;
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use qe_bias::scoring::wire::{serve_scorer, ServeOptions};
use qe_bias::scoring::{open_scorer, score_batch, EndpointOptions, MockScorer, ScoreRequest};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let server = thread::spawn(move || -> std::io::Result<usize> {
        let (stream, _) = listener.accept()?;
        let options = ServeOptions { reverse_after_idle: Some(Duration::from_millis(20)), ..Default::default() };
        serve_scorer(&MockScorer::Hash, stream.try_clone()?, stream, &options)
    });

    let mut scorer = open_scorer(&format!("tcp:{addr}"), EndpointOptions::default())?;
    let info = scorer.info().clone();
    println!("connected to {} with scale {}", info.name, info.scale);

    let requests: Vec<ScoreRequest> = (0..8)
        .map(|i| ScoreRequest::new(format!("r{i}"), "The pilot landed.", format!("Il pilota è atterrato {i}.")))
        .collect();
    let records = score_batch(scorer.as_mut(), &requests, info.scale)?;
    for (req, rec) in requests.iter().zip(&records) {
        assert_eq!(req.id, rec.id);
        assert_eq!(rec.raw, MockScorer::Hash.score(&req.source_text, &req.hypothesis_text));
        println!("{} -> {:.4}", rec.id, rec.normalized);
    }
    drop(scorer);
    println!("endpoint answered {} requests", server.join().expect("server thread")?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
