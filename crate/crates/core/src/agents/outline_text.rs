//! Line format exchanged with the text provider for outlines.
//!
//! ```text
//! TITLE: Exam Heartbeat Battle
//! CHAPTER 1
//! SETTING: ...
//! PLOT: ...
//! ```

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlineText {
    pub title: String,
    /// `(setting, plot)` per chapter, in order.
    pub chapters: Vec<(String, String)>,
}

pub fn render(title: &str, chapters: &[(String, String)]) -> String {
    let mut out = format!("TITLE: {}\n", title.trim());
    for (i, (setting, plot)) in chapters.iter().enumerate() {
        out.push_str(&format!(
            "CHAPTER {}\nSETTING: {}\nPLOT: {}\n",
            i + 1,
            setting.trim(),
            plot.trim()
        ));
    }
    out
}

pub fn parse(text: &str) -> Result<OutlineText, String> {
    let mut title = None;
    let mut chapters: Vec<(Option<String>, Option<String>)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("TITLE:") {
            title = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("CHAPTER") {
            let k: usize = rest.trim().trim_end_matches(':').parse().map_err(|_| {
                format!("line {}: bad chapter header {line:?}", n + 1)
            })?;
            if k != chapters.len() + 1 {
                return Err(format!("line {}: expected chapter {}, found {k}", n + 1, chapters.len() + 1));
            }
            chapters.push((None, None));
        } else if let Some(rest) = line.strip_prefix("SETTING:") {
            let chapter = chapters.last_mut().ok_or(format!("line {}: setting before chapter", n + 1))?;
            chapter.0 = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("PLOT:") {
            let chapter = chapters.last_mut().ok_or(format!("line {}: plot before chapter", n + 1))?;
            chapter.1 = Some(rest.trim().to_string());
        } else {
            return Err(format!("line {}: unexpected text {line:?}", n + 1));
        }
    }
    let title = title.filter(|t| !t.is_empty()).ok_or("missing TITLE")?;
    let chapters = chapters
        .into_iter()
        .enumerate()
        .map(|(i, (setting, plot))| match (setting, plot) {
            (Some(s), Some(p)) if !s.is_empty() && !p.is_empty() => Ok((s, p)),
            _ => Err(format!("chapter {} lacks a setting or plot", i + 1)),
        })
        .collect::<Result<_, _>>()?;
    Ok(OutlineText { title, chapters })
}
