//! Runs every example end to end.

#[allow(dead_code)]
#[path = "../examples/author_outline.rs"]
mod author_outline;

#[allow(dead_code)]
#[path = "../examples/scripted_session.rs"]
mod scripted_session;

#[allow(dead_code)]
#[path = "../examples/branch_override.rs"]
mod branch_override;

#[allow(dead_code)]
#[path = "../examples/storybook_export.rs"]
mod storybook_export;

#[allow(dead_code)]
#[path = "../examples/coping_distribution.rs"]
mod coping_distribution;

#[allow(dead_code)]
#[path = "../examples/sus_report.rs"]
mod sus_report;

#[allow(dead_code)]
#[path = "../examples/cassette_replay.rs"]
mod cassette_replay;

#[allow(dead_code)]
#[path = "../examples/service_walkthrough.rs"]
mod service_walkthrough;

#[test]
fn author_outline_runs() {
    author_outline::run_example().unwrap();
}

#[test]
fn scripted_session_runs() {
    scripted_session::run_example().unwrap();
}

#[test]
fn branch_override_runs() {
    branch_override::run_example().unwrap();
}

#[test]
fn storybook_export_runs() {
    storybook_export::run_example().unwrap();
}

#[test]
fn coping_distribution_runs() {
    coping_distribution::run_example().unwrap();
}

#[test]
fn sus_report_runs() {
    sus_report::run_example().unwrap();
}

#[test]
fn cassette_replay_runs() {
    cassette_replay::run_example().unwrap();
}

#[test]
fn service_walkthrough_runs() {
    service_walkthrough::run_example().unwrap();
}
