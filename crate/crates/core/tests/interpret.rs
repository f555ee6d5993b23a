mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::{stub, Reply};
use lexitopic::interpret::prompt::{KEYWORDS, REPR_DOCS};
use lexitopic::interpret::{
    build_prompts, parse_output, render_prompt, request_completion, run_prompts, GenerationParams, InterpretRecord,
    PromptTask, ProviderConfig, TaskKind,
};
use lexitopic::topic_rep::{Topic, TopicWord};
use serde::Deserialize;

fn provider(url: &str) -> ProviderConfig {
    let mut p = ProviderConfig::new("stub", url, "test-model");
    p.timeout = Duration::from_millis(400);
    p.backoff_base = Duration::from_millis(10);
    p
}

fn label_params() -> GenerationParams {
    GenerationParams::reference(TaskKind::Label)
}

#[test]
fn echo_round_trip() {
    let s = stub(vec![Reply::Text("X".into())]);
    assert_eq!(request_completion(&provider(&s.url), "ciao", &label_params()).unwrap(), "X");
    let body = &s.bodies()[0];
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0]["content"], "ciao");
}

#[test]
fn server_error_then_success() {
    let s = stub(vec![Reply::Status(500), Reply::Text("ok".into())]);
    assert_eq!(request_completion(&provider(&s.url), "p", &label_params()).unwrap(), "ok");
    assert_eq!(s.count(), 2);
}

#[test]
fn rate_limit_is_retried() {
    let s = stub(vec![Reply::Status(429), Reply::Status(503), Reply::Text("ok".into())]);
    assert_eq!(request_completion(&provider(&s.url), "p", &label_params()).unwrap(), "ok");
    assert_eq!(s.count(), 3);
}

#[test]
fn timeout_gives_up_after_three_attempts() {
    let s = stub(vec![Reply::Hang(Duration::from_secs(5))]);
    let start = Instant::now();
    let err = request_completion(&provider(&s.url), "p", &label_params()).unwrap_err();
    assert!(err.is_io());
    assert!(err.to_string().contains("3 attempts"), "{err}");
    assert_eq!(s.count(), 3);
    assert!(start.elapsed() < Duration::from_secs(4));
}

#[test]
fn client_error_is_not_retried() {
    let s = stub(vec![Reply::Status(400)]);
    let err = request_completion(&provider(&s.url), "p", &label_params()).unwrap_err();
    assert!(err.to_string().contains("400"));
    assert_eq!(s.count(), 1);
}

#[test]
fn sampling_parameters_reach_the_server() {
    let s = stub(vec![Reply::Text("x".into())]);
    let mut p = provider(&s.url);
    p.auth_header = Some("Authorization: Bearer token-123".into());
    request_completion(&p, "a", &GenerationParams::reference(TaskKind::Label)).unwrap();
    request_completion(&p, "b", &GenerationParams::reference(TaskKind::Summary)).unwrap();
    request_completion(&p, "c", &GenerationParams::default()).unwrap();
    let reqs = s.requests.lock().unwrap().clone();
    let by_prompt = |c: &str| reqs.iter().find(|r| r.body["messages"][0]["content"] == c).unwrap().clone();
    let a = by_prompt("a");
    assert_eq!(a.body["max_tokens"], 50);
    assert_eq!(a.body["temperature"], 0.1);
    assert_eq!(a.body["repetition_penalty"], 1.1);
    assert!(a.headers.contains(&("authorization".into(), "Bearer token-123".into())));
    assert_eq!(by_prompt("b").body["max_tokens"], 2048);
    let c = by_prompt("c").body;
    assert!(c.get("max_tokens").is_none() && c.get("temperature").is_none() && c.get("repetition_penalty").is_none());
}

fn topics() -> Vec<Topic> {
    (0..3)
        .map(|i| Topic {
            id: i,
            size: 10,
            words: ["frode", "informatica", "[REPR_DOCS]"]
                .iter()
                .map(|w| TopicWord { term: format!("{w}{i}"), weight: 1.0 })
                .collect(),
            representative_docs: vec![format!("d{i}")],
        })
        .chain(std::iter::once(Topic {
            id: -1,
            size: 4,
            words: vec![],
            representative_docs: vec![],
        }))
        .collect()
}

fn doc_text(id: &str) -> Option<String> {
    Some(format!("Testo del segmento {id} con [KEYWORDS] letterale."))
}

#[test]
fn rendered_prompts_have_no_residual_placeholders() {
    for kind in [TaskKind::Label, TaskKind::Summary] {
        let prompts = build_prompts(&topics(), &PromptTask::default_for(kind), doc_text).unwrap();
        assert_eq!(prompts.len(), 3);
        for p in &prompts {
            // the only bracketed tokens left are the ones carried inside keywords or docs
            let stripped = p.prompt.replace(&format!("[REPR_DOCS]{}", p.topic_id), "").replace("con [KEYWORDS] letterale", "");
            assert!(!stripped.contains(KEYWORDS) && !stripped.contains(REPR_DOCS), "{}", p.prompt);
            assert!(p.prompt.contains(&format!("frode{}, informatica{}", p.topic_id, p.topic_id)));
            assert!(p.prompt.contains(&format!("- Testo del segmento d{}", p.topic_id)));
        }
    }
    let custom = PromptTask::new(TaskKind::Label, "K: [KEYWORDS]\nD:\n[REPR_DOCS]").unwrap();
    let r = render_prompt(&custom, &["a".into(), "b".into()], &["x".into(), "y".into()]).unwrap();
    assert_eq!(r, "K: a, b\nD:\n- x\n- y");
    assert!(PromptTask::new(TaskKind::Label, "no placeholders").is_err());
}

#[derive(Deserialize)]
struct OutputCase {
    task: TaskKind,
    raw: String,
    text: String,
    conforming: bool,
}

#[test]
fn parsing_matches_fixtures() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/interpret/outputs.jsonl");
    let cases: Vec<OutputCase> = lexitopic::io::read_jsonl(&path).unwrap();
    assert!(cases.len() >= 8);
    for c in cases {
        let p = parse_output(c.task, &c.raw).unwrap();
        assert_eq!(p.text, c.text, "{:?}", c.raw);
        assert_eq!(p.conforming, c.conforming, "{:?}", c.raw);
    }
}

#[test]
fn run_prompts_is_idempotent_and_ordered() {
    let s = stub(vec![Reply::Text("topic: una sintesi".into())]);
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("interpret.jsonl");
    let mut p = provider(&s.url);
    p.parallelism = 3;
    let prompts = build_prompts(&topics(), &PromptTask::default_for(TaskKind::Summary), doc_text).unwrap();
    let first = run_prompts(&p, TaskKind::Summary, &prompts, &results).unwrap();
    assert_eq!((first.requested, first.skipped, first.failed.len()), (3, 0, 0));
    let again = run_prompts(&p, TaskKind::Summary, &prompts, &results).unwrap();
    assert_eq!((again.requested, again.skipped), (0, 3));
    assert_eq!(s.count(), 3);
    let recs: Vec<InterpretRecord> = lexitopic::io::read_jsonl(&results).unwrap();
    assert_eq!(recs.iter().map(|r| r.topic_id).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(recs.iter().all(|r| r.output == "una sintesi" && r.conforming && r.provider == "stub"));
    assert_eq!(recs[0].prompt_sha256, prompts[0].sha256);

    // a different task is not covered by the earlier answers
    let labels = build_prompts(&topics(), &PromptTask::default_for(TaskKind::Label), doc_text).unwrap();
    let third = run_prompts(&p, TaskKind::Label, &labels, &results).unwrap();
    assert_eq!(third.requested, 3);
}

#[test]
fn failures_are_reported_not_written() {
    let s = stub(vec![Reply::Status(404)]);
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("out.jsonl");
    let prompts = build_prompts(&topics(), &PromptTask::default_for(TaskKind::Label), doc_text).unwrap();
    let sum = run_prompts(&provider(&s.url), TaskKind::Label, &prompts, &results).unwrap();
    assert_eq!(sum.failed.len(), 3);
    assert!(!results.exists());
}
