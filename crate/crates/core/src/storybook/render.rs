use std::fmt::Write;

use super::{Book, ChapterPage, ExportFormat, MilestoneBlock, Storybook, StorybookError};
use crate::assets::AssetRef;

pub fn render(book: &Book, format: ExportFormat) -> Result<String, StorybookError> {
    Ok(match format {
        ExportFormat::Interchange => book.to_interchange()?,
        ExportFormat::PaginatedHtml => render_html(book),
        ExportFormat::PlainText => render_plain_text(book),
    })
}

fn underline(out: &mut String, text: &str, ch: char) {
    out.push_str(text);
    out.push('\n');
    out.extend(std::iter::repeat_n(ch, text.chars().count().max(3)));
    out.push('\n');
}

fn plain_block(out: &mut String, block: &MilestoneBlock) {
    let _ = writeln!(out, "[Milestone {}]", block.index);
    let _ = writeln!(out, "Question: {}", block.question);
    let _ = writeln!(out, "Child's response: {}", block.response);
    if let Some(comment) = &block.teacher_comment {
        let _ = writeln!(out, "Teacher's comment: {comment}");
    }
    let _ = writeln!(out, "AI comment: {}", block.ai_comment);
    out.push('\n');
}

fn plain_chapter(out: &mut String, page: &ChapterPage) {
    underline(out, &format!("Chapter {}", page.index), '-');
    let _ = writeln!(out, "[panel: {}]", page.panel_image);
    out.push('\n');
    for p in &page.paragraphs {
        out.push_str(p);
        out.push_str("\n\n");
    }
}

/// Line-oriented rendering used for golden files.
pub fn render_plain_text(book: &Book) -> String {
    let sb = book.storybook();
    let blocks: &[MilestoneBlock] = match book {
        Book::Print(_) => &[],
        Book::Annotated(a) => &a.milestone_blocks,
    };
    let mut out = String::new();
    underline(&mut out, &sb.title, '=');
    let _ = writeln!(out, "variant: {}", sb.variant);
    out.push('\n');
    underline(&mut out, &format!("Meet {}", sb.character_page.name), '-');
    let _ = writeln!(out, "[illustration: {}]", sb.character_page.illustration);
    out.push('\n');
    let _ = writeln!(out, "{}\n", sb.character_page.description);
    for page in &sb.chapter_pages {
        if let Some(block) = blocks.iter().find(|b| b.index == page.index) {
            plain_block(&mut out, block);
        }
        plain_chapter(&mut out, page);
    }
    underline(&mut out, "The End", '-');
    let _ = writeln!(out, "{}", sb.closing_page);
    if let Book::Annotated(a) = book {
        out.push('\n');
        underline(&mut out, "For Parents", '=');
        let _ = writeln!(out, "Analysis: {}", a.ai_analysis);
        let _ = writeln!(out, "Advice: {}", a.parent_advice);
    }
    out
}

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Exports sit two levels below the data directory.
fn img(asset: &AssetRef, alt: &str) -> String {
    format!("<img src=\"../../{}\" alt=\"{}\">", esc(asset.as_str()), esc(alt))
}

fn html_block(out: &mut String, block: &MilestoneBlock) {
    let _ = writeln!(out, "<aside class=\"milestone\" data-k=\"{}\">", block.index);
    let _ = writeln!(out, "<p class=\"question\">{}</p>", esc(&block.question));
    let _ = writeln!(out, "<p class=\"response\">{}</p>", esc(&block.response));
    if let Some(comment) = &block.teacher_comment {
        let _ = writeln!(out, "<p class=\"teacher\">{}</p>", esc(comment));
    }
    let _ = writeln!(out, "<p class=\"ai\">{}</p>", esc(&block.ai_comment));
    out.push_str("</aside>\n");
}

fn font_size(sb: &Storybook) -> &'static str {
    match sb.layout_meta.font_size_class.as_str() {
        "large" => "16pt",
        "x-large" => "20pt",
        _ => "12pt",
    }
}

/// Print-stylable HTML, one `section.page` per page.
pub fn render_html(book: &Book) -> String {
    let sb = book.storybook();
    let blocks: &[MilestoneBlock] = match book {
        Book::Print(_) => &[],
        Book::Annotated(a) => &a.milestone_blocks,
    };
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", esc(&sb.title));
    let _ = writeln!(
        out,
        "<style>\n@page {{ size: {}; margin: 12mm; }}\nbody {{ font-family: serif; font-size: {}; }}\n\
         section.page {{ page-break-after: always; }}\nimg {{ max-width: 100%; }}\n\
         aside.milestone {{ border-left: 3px solid #888; padding-left: 8px; }}\n</style>",
        esc(&sb.layout_meta.page_size),
        font_size(sb)
    );
    let _ = writeln!(out, "</head>\n<body class=\"{}\">", sb.variant);
    let _ = writeln!(out, "<section class=\"page title\"><h1>{}</h1></section>", esc(&sb.title));
    let cp = &sb.character_page;
    let _ = writeln!(
        out,
        "<section class=\"page character\"><h2>{}</h2>\n{}\n<p>{}</p></section>",
        esc(&cp.name),
        img(&cp.illustration, &cp.name),
        esc(&cp.description)
    );
    for page in &sb.chapter_pages {
        let _ = writeln!(out, "<section class=\"page chapter\" data-k=\"{}\">", page.index);
        if let Some(block) = blocks.iter().find(|b| b.index == page.index) {
            html_block(&mut out, block);
        }
        let _ = writeln!(out, "<h2>Chapter {}</h2>", page.index);
        let _ = writeln!(out, "{}", img(&page.panel_image, &format!("Chapter {}", page.index)));
        for p in &page.paragraphs {
            let _ = writeln!(out, "<p>{}</p>", esc(p));
        }
        out.push_str("</section>\n");
    }
    let _ = writeln!(
        out,
        "<section class=\"page closing\"><h2>The End</h2>\n<p>{}</p></section>",
        esc(&sb.closing_page)
    );
    if let Book::Annotated(a) = book {
        let _ = writeln!(
            out,
            "<section class=\"page parents\"><h2>For Parents</h2>\n<p class=\"analysis\">{}</p>\n\
             <p class=\"advice\">{}</p></section>",
            esc(&a.ai_analysis),
            esc(&a.parent_advice)
        );
    }
    out.push_str("</body>\n</html>\n");
    out
}
