use super::ast::{Indent, Program};
use super::emit::{emit_program, NodeKind, Sink};
use super::lexer::{needs_separation, TokenKind};

/// Renders a program using its detected [`Layout`](super::ast::Layout).
pub fn print_source(p: &Program) -> String {
    let unit = match p.layout.indent {
        Indent::Spaces(n) => " ".repeat(n as usize),
        Indent::Tab => "\t".to_string(),
    };
    let mut sink =
        TextSink { out: String::new(), unit, level: 0, line_start: true, pending_space: false, last: String::new() };
    emit_program(p, &mut sink);
    sink.out
}

struct TextSink {
    out: String,
    unit: String,
    level: usize,
    line_start: bool,
    pending_space: bool,
    last: String,
}

impl TextSink {
    fn write_indent(&mut self) {
        for _ in 0..self.level {
            self.out.push_str(&self.unit);
        }
    }
}

impl Sink for TextSink {
    fn open(&mut self, _kind: NodeKind) {}

    fn close(&mut self) {}

    fn token(&mut self, _kind: TokenKind, text: &str) {
        if self.line_start {
            self.write_indent();
        } else if self.pending_space || needs_separation(&self.last, text) {
            self.out.push(' ');
        }
        self.out.push_str(text);
        self.last.clear();
        self.last.push_str(text);
        self.line_start = false;
        self.pending_space = false;
    }

    fn space(&mut self) {
        if !self.line_start {
            self.pending_space = true;
        }
    }

    fn newline(&mut self) {
        if !self.line_start {
            self.out.push('\n');
            self.line_start = true;
        }
        self.pending_space = false;
    }

    fn blank_line(&mut self) {
        self.newline();
        self.out.push('\n');
    }

    fn indent(&mut self) {
        self.level += 1;
    }

    fn dedent(&mut self) {
        self.level = self.level.saturating_sub(1);
    }

    fn comment(&mut self, text: &str) {
        self.newline();
        if !text.starts_with('#') {
            self.write_indent();
        }
        self.out.push_str(text);
        self.out.push('\n');
        self.last.clear();
    }
}
