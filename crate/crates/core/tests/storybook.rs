use std::path::Path;

use taleweave::domain::Session;
use taleweave::session::{read_log, replay};
use taleweave::sim::{self, SimOptions};
use taleweave::storybook::{
    self, compile, compile_annotated, compile_print, render, Book, ExportFormat, StorybookError, Variant,
};

mod support;
use support::{case, fixture, Rig};

fn c1_session(out: &Path) -> Session {
    sim::run(&case(1).outline, &case(1).script, SimOptions::seeded(41), out).unwrap().session
}

/// Compares against a committed golden file; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = fixture(&format!("golden/{name}"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden file");
}

#[test]
fn plain_text_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = c1_session(dir.path());
    for variant in [Variant::Print, Variant::Annotated] {
        let text = render(&compile(&s, variant).unwrap(), ExportFormat::PlainText).unwrap();
        golden(&format!("c1_{}.txt", variant.as_str()), &text);
    }
}

#[test]
fn print_is_seven_pages_and_omits_the_child_voice() {
    let dir = tempfile::tempdir().unwrap();
    let s = c1_session(dir.path());
    let print = compile_print(&s).unwrap();
    assert_eq!(print.page_count(), 7);
    assert_eq!(print.chapter_pages.iter().map(|p| p.index).collect::<Vec<_>>(), [1, 2, 3, 4]);
    assert!(print.chapter_pages.iter().all(|p| p.paragraphs.len() == 4));
    for format in ExportFormat::ALL {
        let out = render(&Book::Print(print.clone()), format).unwrap();
        for r in &case(1).script.responses {
            assert!(!out.contains(r.as_str()), "{format:?} print export contains {r:?}");
        }
        for m in &s.milestones {
            assert!(!out.contains(&m.question_text), "{format:?} print export contains a question");
        }
    }
}

#[test]
fn annotated_has_one_block_per_milestone_with_the_verbatim_response() {
    let dir = tempfile::tempdir().unwrap();
    let s = c1_session(dir.path());
    let a = compile_annotated(&s).unwrap();
    assert_eq!(a.milestone_blocks.len(), 4);
    for (block, r) in a.milestone_blocks.iter().zip(&case(1).script.responses) {
        assert_eq!(&block.response, r);
        assert!(!block.ai_comment.is_empty());
    }
    assert_eq!(a.book.chapter_pages, compile_print(&s).unwrap().chapter_pages);
    let html = render(&Book::Annotated(a), ExportFormat::PaginatedHtml).unwrap();
    assert_eq!(html.matches("class=\"milestone\"").count(), 4);
}

#[test]
fn teacher_comments_appear_only_in_the_annotated_book() {
    let rig = Rig::new(1);
    let dir = tempfile::tempdir().unwrap();
    let mut s = c1_session(dir.path());
    rig.engine.add_comment(&mut s, 1, "Breathing helped; practise it at home.", "teacher").unwrap();
    let annotated = render(&compile(&s, Variant::Annotated).unwrap(), ExportFormat::PlainText).unwrap();
    let print = render(&compile(&s, Variant::Print).unwrap(), ExportFormat::PlainText).unwrap();
    assert!(annotated.contains("practise it at home"));
    assert!(!print.contains("practise it at home"));
}

#[test]
fn compiling_is_a_function_of_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let live = c1_session(dir.path());
    let log = std::fs::read_dir(dir.path().join("sessions")).unwrap().next().unwrap().unwrap().path();
    let replayed = replay(&read_log(&log).unwrap()).unwrap();
    for variant in [Variant::Print, Variant::Annotated] {
        for format in ExportFormat::ALL {
            let a = render(&compile(&live, variant).unwrap(), format).unwrap();
            let b = render(&compile(&replayed, variant).unwrap(), format).unwrap();
            assert_eq!(a, b, "{variant:?} {format:?}");
        }
    }
}

#[test]
fn interchange_round_trips_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let s = c1_session(dir.path());
    for variant in [Variant::Print, Variant::Annotated] {
        let book = compile(&s, variant).unwrap();
        let text = book.to_interchange().unwrap();
        assert_eq!(Book::from_interchange(&text).unwrap(), book);
    }
}

#[test]
fn incomplete_sessions_do_not_compile() {
    let rig = Rig::new(2);
    let mut s = rig.session(&case(2).outline, 2);
    rig.engine.submit_drawing(&mut s, rig.drawing(), "Kit").unwrap();
    assert!(matches!(compile(&s, Variant::Print), Err(StorybookError::Incomplete { .. })));
    assert!(matches!(compile(&s, Variant::Annotated), Err(StorybookError::Incomplete { .. })));
}

#[test]
fn exports_land_under_the_session_directory() {
    let dir = tempfile::tempdir().unwrap();
    let s = c1_session(dir.path());
    let book = compile(&s, Variant::Annotated).unwrap();
    let path = storybook::export(&book, ExportFormat::PaginatedHtml, dir.path()).unwrap();
    assert_eq!(path, dir.path().join("exports").join(s.session_id.as_str()).join("annotated.html"));
    let html = std::fs::read_to_string(path).unwrap();
    assert!(html.contains("<img src=\"../../assets/"));
    assert!("pdf".parse::<ExportFormat>().is_err());
    assert!("draft".parse::<Variant>().is_err());
}
