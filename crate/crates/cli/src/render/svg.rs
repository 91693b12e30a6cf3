use std::fmt::Write;

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Numbers with a fixed precision keep output byte-stable.
fn f(v: f64) -> String {
    let s = format!("{v:.2}");
    match s.trim_end_matches('0').trim_end_matches('.') {
        "-0" => "0".into(),
        t => t.into(),
    }
}

/// Append-only SVG document.
pub struct Svg {
    body: String,
    width: f64,
    height: f64,
    metadata: String,
}

impl Svg {
    pub fn new(width: f64, height: f64, metadata: &str) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
            metadata: metadata.to_string(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, title: Option<&str>) {
        let _ = write!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}""#,
            f(x),
            f(y),
            f(w),
            f(h),
            fill
        );
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></rect>", escape(t));
            }
            None => self.body.push_str("/>\n"),
        }
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="1"/>"#,
            f(x1),
            f(y1),
            f(x2),
            f(y2),
            stroke
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, dashed: bool) {
        if pts.is_empty() {
            return;
        }
        let p: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", f(x), f(y))).collect();
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{}/>"#,
            p.join(" "),
            stroke,
            dash
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str, title: Option<&str>) {
        let _ = write!(self.body, r#"<circle cx="{}" cy="{}" r="{}" fill="{}""#, f(x), f(y), f(r), fill);
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></circle>", escape(t));
            }
            None => self.body.push_str("/>\n"),
        }
    }

    /// `anchor` is one of start, middle, end.
    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{}">{}</text>"#,
            f(x),
            f(y),
            f(size),
            anchor,
            escape(s)
        );
    }

    pub fn rotated_text(&mut self, x: f64, y: f64, size: f64, anchor: &str, angle: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{0}" y="{1}" font-size="{2}" text-anchor="{3}" transform="rotate({4} {0} {1})">{5}</text>"#,
            f(x),
            f(y),
            f(size),
            anchor,
            f(angle),
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<!-- {meta} -->\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
                "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
                "<metadata>{meta}</metadata>\n",
                "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
                "{body}</svg>\n"
            ),
            meta = escape(&self.metadata.replace("--", "- -")),
            w = f(self.width),
            h = f(self.height),
            body = self.body
        )
    }
}
