//! Random in-subset programs that exercise every transform's preconditions.
//! Loops are bounded by construction and divisors are kept positive.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    out: String,
    /// Assignable integer variables in scope, innermost last.
    ints: Vec<String>,
    /// Loop bounds and counters: read, never written.
    fixed: Vec<String>,
    fresh: usize,
}

impl Gen<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn var(&mut self) -> String {
        self.ints.choose(self.rng).expect("ints in scope").clone()
    }

    fn readable(&mut self) -> String {
        let k = self.rng.random_range(0..self.ints.len() + self.fixed.len());
        if k < self.ints.len() {
            self.ints[k].clone()
        } else {
            self.fixed[k - self.ints.len()].clone()
        }
    }

    fn atom(&mut self) -> String {
        if self.rng.random_bool(0.6) {
            self.readable()
        } else {
            self.rng.random_range(0..10).to_string()
        }
    }

    fn expr(&mut self) -> String {
        let a = self.atom();
        match self.rng.random_range(0..6) {
            0 => a,
            1 => format!("{a} + {}", self.atom()),
            2 => format!("{a} - {}", self.atom()),
            3 => format!("{a} * {}", self.rng.random_range(1..4)),
            4 => format!("{a} % ({} % 3 + 4)", self.atom()),
            _ => format!("({a} + {}) / 2", self.atom()),
        }
    }

    fn cond(&mut self) -> String {
        let op = *["<", "<=", ">", ">=", "==", "!="].choose(self.rng).expect("ops");
        let (a, b) = (self.readable(), self.atom());
        match self.rng.random_range(0..4) {
            0 => format!("{a} {op} {b} && {} > 0", self.readable()),
            1 => format!("!({a} {op} {b})"),
            _ => format!("{a} {op} {b}"),
        }
    }

    fn bound(&mut self) -> String {
        match self.rng.random_range(0..3) {
            0 => "n".into(),
            1 => format!("m % 4 + {}", self.rng.random_range(4..7)),
            _ => self.rng.random_range(1..6).to_string(),
        }
    }

    fn update(&mut self, depth: usize) {
        let v = self.var();
        let text = match self.rng.random_range(0..6) {
            0 => format!("{v} = {v} + {};", self.atom()),
            1 => format!("{v} += {};", self.expr()),
            2 => format!("{v}++;"),
            3 => format!("{v} = {v} - 1;"),
            4 => format!("acc += {};", self.expr()),
            _ => format!("{v} = {};", self.expr()),
        };
        self.line(depth, &text);
    }

    fn output(&mut self, depth: usize) {
        let v = self.readable();
        let text = match self.rng.random_range(0..4) {
            0 => format!("cout << \"{v}=\" << {v} << endl;"),
            1 => format!("printf(\"%d %lld\\n\", {v}, acc);"),
            2 => format!("cout << {v} << ' ' << ch << endl;"),
            _ => format!("printf(\"[%d%%]\\n\", {v});"),
        };
        self.line(depth, &text);
    }

    fn body(&mut self, depth: usize, n: usize, in_for: Option<&str>) {
        let scope = (self.ints.len(), self.fixed.len());
        if let Some(iv) = in_for {
            if self.rng.random_bool(0.3) {
                self.line(depth, &format!("if ({iv} % 3 == 1) continue;"));
            }
        }
        for _ in 0..n {
            self.stmt(depth);
        }
        self.ints.truncate(scope.0);
        self.fixed.truncate(scope.1);
    }

    fn stmt(&mut self, depth: usize) {
        let nest = depth < 3;
        match self.rng.random_range(0..10) {
            0 | 1 => self.update(depth),
            2 => self.output(depth),
            3 => {
                let (a, b) = (self.fresh("p"), self.fresh("q"));
                let (ea, eb) = (self.expr(), self.rng.random_range(0..5));
                self.line(depth, &format!("int {a} = {ea}, {b} = {eb};"));
                self.ints.push(a);
                self.ints.push(b);
            }
            4 => {
                let t = self.fresh("t");
                let e = self.rng.random_range(0..9);
                self.line(depth, &format!("int {t} = {e};"));
                self.update(depth);
                self.ints.push(t);
            }
            5 | 6 if nest => {
                let iv = if depth == 1 { "i".to_string() } else { self.fresh("i") };
                let b = self.bound();
                self.line(depth, &format!("for (int {iv} = 0; {iv} < {b}; {iv}++) {{"));
                self.fixed.push(iv.clone());
                let n = self.rng.random_range(1..3);
                self.body(depth + 1, n, Some(&iv));
                self.fixed.pop();
                self.line(depth, "}");
            }
            7 if nest => {
                let w = self.fresh("w");
                let b = self.bound();
                self.line(depth, &format!("int {w} = {b};"));
                self.line(depth, &format!("while ({w} > 0) {{"));
                let n = self.rng.random_range(1..3);
                self.body(depth + 1, n, None);
                self.line(depth + 1, &format!("{w}--;"));
                self.line(depth, "}");
            }
            8 if nest => {
                let c = self.cond();
                if self.rng.random_bool(0.5) {
                    self.line(depth, &format!("if ({c})"));
                    self.update(depth + 1);
                } else {
                    self.line(depth, &format!("if ({c}) {{"));
                    self.body(depth + 1, 1, None);
                    self.line(depth, "}");
                }
                if self.rng.random_bool(0.6) {
                    self.line(depth, "else {");
                    let n = self.rng.random_range(1..3);
                    self.body(depth + 1, n, None);
                    self.line(depth, "}");
                }
            }
            _ => {
                let c = self.cond();
                self.line(depth, &format!("if (ch < 'y' && {c}) ch++;"));
            }
        }
    }
}

/// A random program reading two integers `n m`. Every loop runs at most
/// `max(n, 9)` times; use [`random_input`] for matching stdin.
pub fn random_program(rng: &mut ChaCha8Rng) -> String {
    let mut g = Gen {
        rng,
        out: String::new(),
        ints: vec!["a".into(), "b".into()],
        fixed: vec!["n".into(), "m".into()],
        fresh: 0,
    };
    g.out.push_str("#include <cstdio>\n#include <iostream>\nusing namespace std;\n\n");
    let helper = g.rng.random_bool(0.5);
    if helper {
        g.out.push_str("long long mix(long long v, int w) {\n    if (w > 3) {\n        return v * 2 + w;\n    }\n    return v - w;\n}\n\n");
    }
    g.out.push_str("int main() {\n");
    g.line(1, "int n, m;");
    if g.rng.random_bool(0.5) {
        g.line(1, "cin >> n >> m;");
    } else {
        g.line(1, "scanf(\"%d %d\", &n, &m);");
    }
    g.line(1, "if (n < 0) n = -n;");
    g.line(1, "n = n % 6;");
    g.line(1, "if (m < 0)");
    g.line(2, "m = -m;");
    let (a, b) = (g.rng.random_range(0..5), g.rng.random_range(1..7));
    g.line(1, &format!("int a = {a}, b = {b};"));
    g.line(1, "long long acc = 0;");
    g.line(1, "char ch = 'a';");
    g.line(1, "string word = \"w\";");
    let count = g.rng.random_range(3..7);
    for _ in 0..count {
        g.stmt(1);
    }
    if helper {
        g.line(1, "acc = mix(acc, a % 5);");
    }
    g.line(1, "cout << a << \" \" << b << \" \" << acc << endl;");
    g.line(1, "printf(\"%c %s %d\\n\", ch, word.c_str(), n + m);");
    g.line(1, "return 0;");
    g.out.push_str("}\n");
    g.out
}

pub fn random_input(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}\n", rng.random_range(-10..40), rng.random_range(-30..30))
}
