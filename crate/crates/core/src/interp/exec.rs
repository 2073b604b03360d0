//! Tree-walking interpreter for the subset.

use serde::{Deserialize, Serialize};

use super::value::{format_general, Value};
use crate::frontend::ast::*;
use crate::frontend::lexer::unescape;
use crate::frontend::sema::{analyze, format_specs, parse_int_literal, BindingKind, SType, Sema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub step_limit: u64,
    pub output_limit: usize,
    pub max_call_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { step_limit: 10_000_000, output_limit: 1 << 20, max_call_depth: 4_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeReason {
    DivZero,
    IndexOutOfBounds,
    InputExhausted,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "reason")]
pub enum Status {
    Ok,
    RuntimeError(RuntimeReason),
    Timeout,
    ResourceLimit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    #[serde(flatten)]
    pub status: Status,
    pub stdout: String,
    pub steps: u64,
    /// Input items successfully consumed.
    pub input_items: usize,
    pub input_stmts: usize,
    pub output_stmts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ExecutionResult {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// Runs `main` on `stdin`. Binding failures yield `runtime-error{unresolved}`.
pub fn execute(p: &Program, stdin: &str, limits: Limits) -> ExecutionResult {
    match analyze(p) {
        Ok(sema) => execute_resolved(p, &sema, stdin, limits),
        Err(f) => unresolved(f.to_string()),
    }
}

fn unresolved(message: String) -> ExecutionResult {
    ExecutionResult {
        status: Status::RuntimeError(RuntimeReason::Unresolved),
        stdout: String::new(),
        steps: 0,
        input_items: 0,
        input_stmts: 0,
        output_stmts: 0,
        message: Some(message),
    }
}

const STACK_BYTES: usize = 512 << 20;

pub fn execute_resolved(p: &Program, sema: &Sema, stdin: &str, limits: Limits) -> ExecutionResult {
    let Some(main) = sema.function("main") else {
        return unresolved("no 'main' function".into());
    };
    let main_index = sema.functions.iter().position(|f| std::ptr::eq(f, main)).expect("main is listed");
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, || {
                let mut m = Machine::new(p, sema, stdin, limits);
                let halt = m.run(main_index).err();
                m.finish(halt)
            })
            .expect("spawn interpreter thread")
            .join()
            .expect("interpreter thread does not panic")
    })
}

#[derive(Debug)]
enum Halt {
    Runtime(RuntimeReason, String),
    Timeout,
    Resource(String),
}

type R<T> = Result<T, Halt>;

fn oob(what: &str, index: i64, len: usize) -> Halt {
    Halt::Runtime(RuntimeReason::IndexOutOfBounds, format!("{what} index {index} out of range for length {len}"))
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Value),
}

#[derive(Clone, Debug)]
struct Place {
    cell: usize,
    path: Vec<usize>,
}

struct Machine<'p> {
    prog: &'p Program,
    sema: &'p Sema,
    store: Vec<Value>,
    frames: Vec<Vec<Place>>,
    input: &'p [u8],
    in_pos: usize,
    out: Vec<u8>,
    limits: Limits,
    steps: u64,
    input_items: usize,
    input_stmts: usize,
    output_stmts: usize,
}

impl<'p> Machine<'p> {
    fn new(prog: &'p Program, sema: &'p Sema, stdin: &'p str, limits: Limits) -> Self {
        Machine {
            prog,
            sema,
            store: vec![Value::Int(0); sema.n_globals],
            frames: Vec::new(),
            input: stdin.as_bytes(),
            in_pos: 0,
            out: Vec::new(),
            limits,
            steps: 0,
            input_items: 0,
            input_stmts: 0,
            output_stmts: 0,
        }
    }

    fn finish(self, halt: Option<Halt>) -> ExecutionResult {
        let (status, message) = match halt {
            None => (Status::Ok, None),
            Some(Halt::Runtime(r, m)) => (Status::RuntimeError(r), Some(m)),
            Some(Halt::Timeout) => (Status::Timeout, Some(format!("step limit {} exceeded", self.limits.step_limit))),
            Some(Halt::Resource(m)) => (Status::ResourceLimit, Some(m)),
        };
        ExecutionResult {
            status,
            stdout: String::from_utf8_lossy(&self.out).into_owned(),
            steps: self.steps,
            input_items: self.input_items,
            input_stmts: self.input_stmts,
            output_stmts: self.output_stmts,
            message,
        }
    }

    fn run(&mut self, main: usize) -> R<()> {
        let mut globals = Vec::new();
        for item in &self.prog.items {
            if let ItemKind::Global(d) = &item.kind {
                globals.push(d);
            }
        }
        self.frames.push(Vec::new());
        for d in globals {
            self.decl(d)?;
        }
        self.frames.pop();
        self.call(main, Vec::new())?;
        Ok(())
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.limits.step_limit {
            return Err(Halt::Timeout);
        }
        Ok(())
    }

    fn function(&self, index: usize) -> &'p Function {
        match &self.prog.items[self.sema.functions[index].item].kind {
            ItemKind::Function(f) => f,
            _ => unreachable!("function info points at a function item"),
        }
    }

    /// Arguments are values for by-value params and places for reference params.
    fn call(&mut self, index: usize, args: Vec<Arg>) -> R<Value> {
        if self.frames.len() >= self.limits.max_call_depth {
            return Err(Halt::Resource(format!("call depth limit {} exceeded", self.limits.max_call_depth)));
        }
        let info = &self.sema.functions[index];
        let base = self.store.len();
        let mut frame = Vec::with_capacity(info.n_slots);
        for i in 0..info.n_slots {
            self.store.push(Value::Int(0));
            frame.push(Place { cell: base + i, path: Vec::new() });
        }
        for (param, arg) in info.params.iter().zip(args) {
            let b = &self.sema.bindings[*param];
            match arg {
                Arg::Ref(place) => frame[b.slot] = place,
                Arg::Val(v) => self.store[base + b.slot] = v.coerce(&b.ty),
            }
        }
        self.frames.push(frame);
        let f = self.function(index);
        let flow = self.block(&f.body.stmts);
        self.frames.pop();
        self.store.truncate(base);
        match flow? {
            Flow::Return(v) => Ok(v.coerce(&info.ret)),
            _ => Ok(Value::default_for(&info.ret)),
        }
    }

    fn var_place(&self, id: &Ident) -> R<Place> {
        let b = self.sema.binding_of(id);
        match b.kind {
            BindingKind::Global => Ok(Place { cell: b.slot, path: Vec::new() }),
            BindingKind::Local | BindingKind::Param => Ok(self.frames.last().expect("inside a call")[b.slot].clone()),
            _ => Err(Halt::Runtime(RuntimeReason::Unresolved, format!("'{}' is not a variable", id.name))),
        }
    }

    fn place(&mut self, e: &Expr) -> R<Place> {
        match e {
            Expr::Var(id) => self.var_place(id),
            Expr::Paren(inner) => self.place(inner),
            Expr::Index { base, index } => {
                let mut p = self.place(base)?;
                let i = self.eval(index)?.as_i64();
                let len = self.len_at(&p)?;
                if i < 0 || i as usize >= len {
                    return Err(oob("subscript", i, len));
                }
                p.path.push(i as usize);
                Ok(p)
            }
            _ => Err(Halt::Runtime(RuntimeReason::Unresolved, "expression is not assignable".into())),
        }
    }

    fn len_at(&self, p: &Place) -> R<usize> {
        Ok(match self.get(p)? {
            Value::List(items) => items.len(),
            Value::Str(s) => s.len(),
            _ => 0,
        })
    }

    /// Reference to the value at a place. Paths never end inside a string.
    fn get(&self, p: &Place) -> R<&Value> {
        let mut v = &self.store[p.cell];
        for &i in &p.path {
            v = match v {
                Value::List(items) => items.get(i).ok_or_else(|| oob("element", i as i64, items.len()))?,
                _ => return Err(oob("element", i as i64, 0)),
            };
        }
        Ok(v)
    }

    fn get_mut(&mut self, path: &[usize], cell: usize) -> R<&mut Value> {
        let mut v = &mut self.store[cell];
        for &i in path {
            v = match v {
                Value::List(items) => {
                    let len = items.len();
                    items.get_mut(i).ok_or_else(|| oob("element", i as i64, len))?
                }
                _ => return Err(oob("element", i as i64, 0)),
            };
        }
        Ok(v)
    }

    fn read(&self, p: &Place) -> R<Value> {
        if let Some((&last, prefix)) = p.path.split_last() {
            let parent = self.get(&Place { cell: p.cell, path: prefix.to_vec() })?;
            return match parent {
                Value::Str(s) => {
                    s.get(last).map(|c| Value::Char(*c)).ok_or_else(|| oob("string", last as i64, s.len()))
                }
                Value::List(items) => items.get(last).cloned().ok_or_else(|| oob("element", last as i64, items.len())),
                _ => Err(oob("element", last as i64, 0)),
            };
        }
        Ok(self.store[p.cell].clone())
    }

    fn write(&mut self, p: &Place, v: Value) -> R<Value> {
        if let Some((&last, prefix)) = p.path.split_last() {
            let parent = self.get_mut(prefix, p.cell)?;
            if let Value::Str(s) = parent {
                let len = s.len();
                let c = s.get_mut(last).ok_or_else(|| oob("string", last as i64, len))?;
                *c = v.as_i64() as u8;
                return Ok(Value::Char(*c));
            }
        }
        let slot = self.get_mut(&p.path, p.cell)?;
        let v = v.coerce_like(slot);
        *slot = v.clone();
        Ok(v)
    }

    fn init_value(&mut self, ty: &SType, dims: &[i64], init: Option<&Init>) -> R<Value> {
        if let Some((&n, rest)) = dims.split_first() {
            let SType::Array(elem) = ty else { unreachable!("array declarator has array type") };
            let mut items = vec![self.init_value(elem, rest, None)?; n.max(0) as usize];
            if let Some(Init::List(es)) = init {
                if es.len() > items.len() {
                    return Err(oob("initializer", es.len() as i64, items.len()));
                }
                for (slot, e) in items.iter_mut().zip(es) {
                    *slot = self.eval(e)?.coerce(elem);
                }
            }
            return Ok(Value::List(items));
        }
        Ok(match (ty, init) {
            (_, None) => Value::default_for(ty),
            (_, Some(Init::Assign(e))) => self.eval(e)?.coerce(ty),
            (SType::Vector(elem), Some(Init::List(es))) => {
                let mut items = Vec::with_capacity(es.len());
                for e in es {
                    items.push(self.eval(e)?.coerce(elem));
                }
                Value::List(items)
            }
            (SType::Vector(elem), Some(Init::Ctor(args))) => {
                let n = self.eval(&args[0])?.as_i64();
                if n < 0 {
                    return Err(Halt::Resource(format!("vector length {n} is negative")));
                }
                self.check_alloc(n as usize)?;
                let fill = match args.get(1) {
                    Some(e) => self.eval(e)?.coerce(elem),
                    None => Value::default_for(elem),
                };
                Value::List(vec![fill; n as usize])
            }
            (SType::Str, Some(Init::Ctor(args))) if args.len() == 2 => {
                let n = self.eval(&args[0])?.as_i64().max(0) as usize;
                self.check_alloc(n)?;
                let c = self.eval(&args[1])?.as_i64() as u8;
                Value::Str(vec![c; n])
            }
            (_, Some(Init::Ctor(args))) => self.eval(&args[0])?.coerce(ty),
            (_, Some(Init::List(_))) => Value::default_for(ty),
        })
    }

    fn check_alloc(&self, n: usize) -> R<()> {
        if n > 50_000_000 {
            return Err(Halt::Resource(format!("allocation of {n} elements refused")));
        }
        Ok(())
    }

    fn decl(&mut self, d: &Decl) -> R<()> {
        for dc in &d.declarators {
            let mut dims = Vec::with_capacity(dc.dims.len());
            for e in &dc.dims {
                dims.push(self.eval(e)?.as_i64());
            }
            self.check_alloc(dims.iter().map(|&d| d.max(0) as usize).product())?;
            let ty = self.sema.binding_of(&dc.name).ty.clone();
            let v = self.init_value(&ty, &dims, dc.init.as_ref())?;
            let p = self.var_place(&dc.name)?;
            // Fresh declaration: replace rather than coerce into the previous occupant.
            self.store[p.cell] = v;
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> R<Flow> {
        for s in stmts {
            match self.stmt(s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> R<Flow> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl(d) => self.decl(d)?,
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
            StmtKind::If { cond, then, els } => {
                if self.eval(cond)?.truthy() {
                    return self.stmt(then);
                } else if let Some(e) = els {
                    return self.stmt(e);
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)?.truthy() {
                    match self.stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    self.tick()?;
                }
            }
            StmtKind::DoWhile { body, cond } => loop {
                match self.stmt(body)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
                self.tick()?;
                if !self.eval(cond)?.truthy() {
                    break;
                }
            },
            StmtKind::For { init, cond, step, body } => {
                match init {
                    Some(ForInit::Decl(d)) => self.decl(d)?,
                    Some(ForInit::Expr(e)) => {
                        self.eval(e)?;
                    }
                    None => {}
                }
                loop {
                    if let Some(c) = cond {
                        if !self.eval(c)?.truthy() {
                            break;
                        }
                    }
                    match self.stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    if let Some(st) = step {
                        self.eval(st)?;
                    }
                    self.tick()?;
                }
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::Void,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Block(b) => return self.block(&b.stmts),
            StmtKind::Empty => {}
            StmtKind::Output(items) => {
                self.output_stmts += 1;
                for it in items {
                    match it {
                        OutItem::Endl => self.out.push(b'\n'),
                        OutItem::Expr(e) => {
                            let v = self.eval(e)?;
                            v.stream_text(&mut self.out);
                        }
                    }
                }
                self.check_output()?;
            }
            StmtKind::Input(targets) => {
                self.input_stmts += 1;
                for t in targets {
                    let p = self.place(t)?;
                    let current = self.read(&p)?;
                    let v = match current {
                        Value::Int(_) => self.read_int()?,
                        Value::Float(_) => self.read_float()?,
                        Value::Char(_) => self.read_char(true)?,
                        Value::Str(_) => self.read_word()?,
                        _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, "unsupported input target".into())),
                    };
                    self.write(&p, v)?;
                    self.input_items += 1;
                }
            }
            StmtKind::Printf { format, args } => {
                self.output_stmts += 1;
                self.printf(format, args)?;
                self.check_output()?;
            }
            StmtKind::Scanf { format, args } => {
                self.input_stmts += 1;
                self.scanf(format, args)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn check_output(&self) -> R<()> {
        if self.out.len() > self.limits.output_limit {
            return Err(Halt::Resource(format!("output limit {} bytes exceeded", self.limits.output_limit)));
        }
        Ok(())
    }

    fn printf(&mut self, format: &str, args: &[Expr]) -> R<()> {
        let text = unescape(format);
        let mut args = args.iter();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c != '%' {
                let mut buf = [0u8; 4];
                self.out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                continue;
            }
            let mut spec = String::new();
            while let Some(&n) = chars.peek() {
                spec.push(n);
                chars.next();
                if n.is_ascii_alphabetic() && n != 'l' || n == '%' {
                    break;
                }
            }
            if spec == "%" {
                self.out.push(b'%');
                continue;
            }
            let arg = args
                .next()
                .ok_or_else(|| Halt::Runtime(RuntimeReason::Unresolved, "missing printf argument".into()))?;
            let v = self.eval(arg)?;
            match spec.as_str() {
                "d" | "lld" => self.out.extend_from_slice(v.as_i64().to_string().as_bytes()),
                "f" | "lf" => self.out.extend_from_slice(format!("{:.6}", v.as_f64()).as_bytes()),
                "c" => self.out.push(v.as_i64() as u8),
                "s" => v.stream_text(&mut self.out),
                "g" => self.out.extend_from_slice(format_general(v.as_f64(), 6).as_bytes()),
                _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, format!("unsupported conversion %{spec}"))),
            }
        }
        Ok(())
    }

    fn scanf(&mut self, format: &str, args: &[Expr]) -> R<()> {
        let specs = format_specs(format).map_err(|m| Halt::Runtime(RuntimeReason::Unresolved, m))?;
        let text = unescape(format);
        // Whitespace in the format skips input whitespace; `%c` alone does not skip.
        let mut skip_before: Vec<bool> = Vec::new();
        let mut pending_ws = false;
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_whitespace() {
                pending_ws = true;
            } else if c == '%' {
                let mut spec = String::new();
                while let Some(&n) = chars.peek() {
                    spec.push(n);
                    chars.next();
                    if n.is_ascii_alphabetic() && n != 'l' || n == '%' {
                        break;
                    }
                }
                if spec != "%" {
                    skip_before.push(pending_ws);
                }
                pending_ws = false;
            }
        }
        for ((spec, arg), skip) in specs.iter().zip(args).zip(skip_before) {
            let target = match arg {
                Expr::Unary { op: UnaryOp::AddrOf, expr } => expr.as_ref(),
                other => other,
            };
            let p = self.place(target)?;
            let v = match spec.as_str() {
                "d" | "lld" => self.read_int()?,
                "f" | "lf" => self.read_float()?,
                "s" => self.read_word()?,
                "c" => self.read_char(skip)?,
                _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, format!("unsupported conversion %{spec}"))),
            };
            self.write(&p, v)?;
            self.input_items += 1;
        }
        Ok(())
    }

    fn skip_ws(&mut self) {
        while self.in_pos < self.input.len() && self.input[self.in_pos].is_ascii_whitespace() {
            self.in_pos += 1;
        }
    }

    fn exhausted(&self, what: &str) -> Halt {
        Halt::Runtime(RuntimeReason::InputExhausted, format!("no {what} available at input offset {}", self.in_pos))
    }

    fn take_while(&mut self, start: usize, f: impl Fn(usize, u8) -> bool) -> usize {
        let mut end = start;
        while end < self.input.len() && f(end - start, self.input[end]) {
            end += 1;
        }
        end
    }

    fn read_int(&mut self) -> R<Value> {
        self.skip_ws();
        let start = self.in_pos;
        let end = self.take_while(start, |i, b| b.is_ascii_digit() || i == 0 && (b == b'-' || b == b'+'));
        let text = std::str::from_utf8(&self.input[start..end]).unwrap_or_default();
        let v = text.parse::<i64>().map_err(|_| self.exhausted("integer"))?;
        self.in_pos = end;
        Ok(Value::Int(v))
    }

    fn read_float(&mut self) -> R<Value> {
        self.skip_ws();
        let start = self.in_pos;
        let mut end =
            self.take_while(start, |_, b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'-' | b'+'));
        // Back off characters that do not extend a valid number (e.g. a trailing sign).
        while end > start
            && std::str::from_utf8(&self.input[start..end]).ok().and_then(|t| t.parse::<f64>().ok()).is_none()
        {
            end -= 1;
        }
        let text = std::str::from_utf8(&self.input[start..end]).unwrap_or_default();
        let v = text.parse::<f64>().map_err(|_| self.exhausted("number"))?;
        self.in_pos = end;
        Ok(Value::Float(v))
    }

    fn read_word(&mut self) -> R<Value> {
        self.skip_ws();
        let start = self.in_pos;
        let end = self.take_while(start, |_, b| !b.is_ascii_whitespace());
        if end == start {
            return Err(self.exhausted("word"));
        }
        self.in_pos = end;
        Ok(Value::Str(self.input[start..end].to_vec()))
    }

    fn read_char(&mut self, skip: bool) -> R<Value> {
        if skip {
            self.skip_ws();
        }
        let c = *self.input.get(self.in_pos).ok_or_else(|| self.exhausted("character"))?;
        self.in_pos += 1;
        Ok(Value::Char(c))
    }

    fn eval(&mut self, e: &Expr) -> R<Value> {
        Ok(match e {
            Expr::IntLit(s) => Value::Int(parse_int_literal(s).unwrap_or(0)),
            Expr::FloatLit(s) => Value::Float(s.trim_end_matches(['f', 'F', 'l', 'L']).parse().unwrap_or(0.0)),
            Expr::CharLit(s) => Value::Char(unescape(s).bytes().next().unwrap_or(0)),
            Expr::StrLit(s) => Value::Str(unescape(s).into_bytes()),
            Expr::BoolLit(b) => Value::Bool(*b),
            Expr::Var(id) => {
                let p = self.var_place(id)?;
                self.read(&p)?
            }
            Expr::Paren(inner) => self.eval(inner)?,
            Expr::Index { .. } => match self.place(e) {
                Ok(p) => self.read(&p)?,
                Err(Halt::Runtime(RuntimeReason::Unresolved, _)) => self.index_rvalue(e)?,
                Err(h) => return Err(h),
            },
            Expr::Unary { op, expr } => {
                let v = self.eval(expr)?;
                match op {
                    UnaryOp::Not => Value::Bool(!v.truthy()),
                    UnaryOp::Neg if v.is_float() => Value::Float(-v.as_f64()),
                    UnaryOp::Neg => Value::Int(v.as_i64().wrapping_neg()),
                    UnaryOp::Plus if v.is_float() => v,
                    UnaryOp::Plus => Value::Int(v.as_i64()),
                    UnaryOp::BitNot => Value::Int(!v.as_i64()),
                    UnaryOp::AddrOf => {
                        return Err(Halt::Runtime(RuntimeReason::Unresolved, "address-of is not a value".into()))
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::And => Value::Bool(self.eval(lhs)?.truthy() && self.eval(rhs)?.truthy()),
                BinOp::Or => Value::Bool(self.eval(lhs)?.truthy() || self.eval(rhs)?.truthy()),
                _ => {
                    let l = self.eval(lhs)?;
                    let r = self.eval(rhs)?;
                    binary(*op, l, r)?
                }
            },
            Expr::Assign { op, target, value } => {
                let p = self.place(target)?;
                let v = self.eval(value)?;
                let v = match op.0 {
                    None => v,
                    Some(bop) => {
                        let cur = self.read(&p)?;
                        binary(bop, cur, v)?
                    }
                };
                self.write(&p, v)?
            }
            Expr::Update { increment, prefix, target } => {
                let p = self.place(target)?;
                let old = self.read(&p)?;
                let delta = if *increment { 1 } else { -1 };
                let new = match &old {
                    Value::Float(f) => Value::Float(f + delta as f64),
                    other => Value::Int(other.as_i64().wrapping_add(delta)),
                };
                let new = self.write(&p, new)?;
                if *prefix {
                    new
                } else {
                    old
                }
            }
            Expr::Ternary { cond, then, els } => {
                let (a, b) = (then, els);
                let picked = if self.eval(cond)?.truthy() { self.eval(a)? } else { self.eval(b)? };
                // Mixed numeric branches convert to double.
                let float = matches!(self.sema.type_of(a), Some(SType::Double))
                    || matches!(self.sema.type_of(b), Some(SType::Double));
                if float {
                    Value::Float(picked.as_f64())
                } else {
                    picked
                }
            }
            Expr::Cast { ty, expr } => {
                let v = self.eval(expr)?;
                v.coerce(&self.sema.resolve_type(ty))
            }
            Expr::Call { callee, args } => self.call_expr(callee, args)?,
            Expr::Method { recv, method, args } => self.method(recv, method, args)?,
        })
    }

    /// Subscript of a non-lvalue (e.g. the result of `substr`).
    fn index_rvalue(&mut self, e: &Expr) -> R<Value> {
        let Expr::Index { base, index } = e else { unreachable!() };
        let b = self.eval(base)?;
        let i = self.eval(index)?.as_i64();
        match b {
            Value::Str(s) => {
                s.get(i as usize).filter(|_| i >= 0).map(|c| Value::Char(*c)).ok_or_else(|| oob("string", i, s.len()))
            }
            Value::List(items) => {
                let len = items.len();
                items.into_iter().nth(i as usize).filter(|_| i >= 0).ok_or_else(|| oob("element", i, len))
            }
            _ => Err(oob("element", i, 0)),
        }
    }

    fn call_expr(&mut self, callee: &Ident, args: &[Expr]) -> R<Value> {
        let b = self.sema.binding_of(callee);
        match b.kind {
            BindingKind::Builtin => match callee.name.as_str() {
                "swap" => {
                    let pa = self.place(&args[0])?;
                    let pb = self.place(&args[1])?;
                    let va = self.read(&pa)?;
                    let vb = self.read(&pb)?;
                    self.write(&pa, vb)?;
                    self.write(&pb, va)?;
                    Ok(Value::Void)
                }
                name => {
                    let mut vals = Vec::with_capacity(args.len());
                    for a in args {
                        vals.push(self.eval(a)?);
                    }
                    builtin(name, vals)
                }
            },
            BindingKind::Function => {
                let index = b.slot;
                let params = self.sema.functions[index].params.clone();
                let mut vals = Vec::with_capacity(args.len());
                for (a, p) in args.iter().zip(params) {
                    if self.sema.bindings[p].by_ref {
                        vals.push(Arg::Ref(self.place(a)?));
                    } else {
                        vals.push(Arg::Val(self.eval(a)?));
                    }
                }
                self.call(index, vals)
            }
            _ => Err(Halt::Runtime(RuntimeReason::Unresolved, format!("'{}' is not callable", callee.name))),
        }
    }

    fn method(&mut self, recv: &Expr, method: &str, args: &[Expr]) -> R<Value> {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a)?);
        }
        if method == "push_back" {
            let elem = match self.sema.type_of(recv) {
                Some(SType::Vector(inner)) => *inner,
                _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, "push_back on a non-vector".into())),
            };
            let p = self.place(recv)?;
            let v = vals.pop().expect("push_back takes one argument").coerce(&elem);
            let Value::List(items) = self.get_mut(&p.path, p.cell)? else {
                return Err(Halt::Runtime(RuntimeReason::Unresolved, "push_back on a non-vector".into()));
            };
            if items.len() >= 50_000_000 {
                return Err(Halt::Resource("vector too large".into()));
            }
            items.push(v);
            return Ok(Value::Void);
        }
        let owned;
        let target: &Value = match self.place(recv) {
            Ok(p)
                if p.path.is_empty()
                    || !matches!(
                        self.get(&Place { cell: p.cell, path: p.path[..p.path.len() - 1].to_vec() })?,
                        Value::Str(_)
                    ) =>
            {
                self.get(&p)?
            }
            _ => {
                owned = self.eval(recv)?;
                &owned
            }
        };
        match (target, method) {
            (Value::List(items), "size") => Ok(Value::Int(items.len() as i64)),
            (Value::Str(s), "size" | "length") => Ok(Value::Int(s.len() as i64)),
            (Value::Str(s), "c_str") => Ok(Value::Str(s.clone())),
            (Value::Str(s), "substr") => {
                let pos = vals[0].as_i64();
                if pos < 0 || pos as usize > s.len() {
                    return Err(oob("substr position", pos, s.len()));
                }
                let pos = pos as usize;
                let len = vals.get(1).map(|v| v.as_i64()).unwrap_or(i64::MAX);
                let end = if len < 0 { s.len() } else { pos.saturating_add(len as usize).min(s.len()) };
                Ok(Value::Str(s[pos..end].to_vec()))
            }
            _ => Err(Halt::Runtime(RuntimeReason::Unresolved, format!("unsupported method '{method}'"))),
        }
    }
}

enum Arg {
    Val(Value),
    Ref(Place),
}

fn builtin(name: &str, vals: Vec<Value>) -> R<Value> {
    let pick = |want_max: bool, a: Value, b: Value| -> Value {
        let a_less = match (&a, &b) {
            (Value::Str(x), Value::Str(y)) => x < y,
            _ if a.is_float() || b.is_float() => a.as_f64() < b.as_f64(),
            _ => a.as_i64() < b.as_i64(),
        };
        // std::min returns the first argument on ties, std::max the first as well.
        match (want_max, a_less) {
            (true, true) => b,
            (true, false) => a,
            (false, _) => {
                let b_less = match (&a, &b) {
                    (Value::Str(x), Value::Str(y)) => y < x,
                    _ if a.is_float() || b.is_float() => b.as_f64() < a.as_f64(),
                    _ => b.as_i64() < a.as_i64(),
                };
                if b_less {
                    b
                } else {
                    a
                }
            }
        }
    };
    let mut it = vals.into_iter();
    let mut next = || it.next().unwrap_or(Value::Int(0));
    Ok(match name {
        "min" => {
            let (a, b) = (next(), next());
            pick(false, a, b)
        }
        "max" => {
            let (a, b) = (next(), next());
            pick(true, a, b)
        }
        "abs" => match next() {
            Value::Float(f) => Value::Float(f.abs()),
            v => Value::Int(v.as_i64().wrapping_abs()),
        },
        "sqrt" => Value::Float(next().as_f64().sqrt()),
        _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, format!("unknown builtin '{name}'"))),
    })
}

fn binary(op: BinOp, l: Value, r: Value) -> R<Value> {
    use BinOp::*;
    if let (Value::Str(a), Value::Str(b)) = (&l, &r) {
        return Ok(match op {
            Add => Value::Str([a.as_slice(), b.as_slice()].concat()),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            Ge => Value::Bool(a >= b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            _ => return Err(Halt::Runtime(RuntimeReason::Unresolved, "invalid string operator".into())),
        });
    }
    match (&l, &r, op) {
        (Value::Str(a), Value::Char(c), Add) => return Ok(Value::Str([a.as_slice(), &[*c]].concat())),
        (Value::Char(c), Value::Str(b), Add) => return Ok(Value::Str([&[*c], b.as_slice()].concat())),
        _ => {}
    }
    if l.is_float() || r.is_float() {
        let (a, b) = (l.as_f64(), r.as_f64());
        return Ok(match op {
            Mul => Value::Float(a * b),
            Div => Value::Float(a / b),
            Add => Value::Float(a + b),
            Sub => Value::Float(a - b),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            Ge => Value::Bool(a >= b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            _ => {
                return Err(Halt::Runtime(RuntimeReason::Unresolved, format!("invalid operands to '{}'", op.as_str())))
            }
        });
    }
    let (a, b) = (l.as_i64(), r.as_i64());
    let div_zero = || Halt::Runtime(RuntimeReason::DivZero, "integer division by zero".into());
    Ok(match op {
        Mul => Value::Int(a.wrapping_mul(b)),
        Div => Value::Int(a.checked_div(b).or_else(|| (b != 0).then(|| a.wrapping_div(b))).ok_or_else(div_zero)?),
        Rem => Value::Int(a.checked_rem(b).or_else(|| (b != 0).then(|| a.wrapping_rem(b))).ok_or_else(div_zero)?),
        Add => Value::Int(a.wrapping_add(b)),
        Sub => Value::Int(a.wrapping_sub(b)),
        Shl => Value::Int(a.wrapping_shl(b as u32)),
        Shr => Value::Int(a.wrapping_shr(b as u32)),
        Lt => Value::Bool(a < b),
        Le => Value::Bool(a <= b),
        Gt => Value::Bool(a > b),
        Ge => Value::Bool(a >= b),
        Eq => Value::Bool(a == b),
        Ne => Value::Bool(a != b),
        BitAnd => Value::Int(a & b),
        BitXor => Value::Int(a ^ b),
        BitOr => Value::Int(a | b),
        And | Or => unreachable!("short-circuit operators are evaluated lazily"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn run(src: &str, input: &str) -> ExecutionResult {
        execute(&parse_source(src).unwrap(), input, Limits::default())
    }

    #[test]
    fn sum_of_two() {
        let r = run("int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}", "2 3");
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.stdout, "5\n");
        assert_eq!((r.input_items, r.input_stmts, r.output_stmts), (2, 1, 1));
    }

    #[test]
    fn infinite_loop_times_out() {
        let src = "int main(){while(true){} return 0;}";
        let r = execute(&parse_source(src).unwrap(), "", Limits { step_limit: 1_000_000, ..Limits::default() });
        assert_eq!(r.status, Status::Timeout);
        assert!(r.steps <= 1_000_001);
    }

    #[test]
    fn input_exhausted() {
        let r = run("int main(){int x; cin>>x; return 0;}", "");
        assert_eq!(r.status, Status::RuntimeError(RuntimeReason::InputExhausted));
    }

    #[test]
    fn division_by_zero_and_wrapping() {
        let r = run("int main(){int z=0; cout<<1/z; return 0;}", "");
        assert_eq!(r.status, Status::RuntimeError(RuntimeReason::DivZero));
        let r = run("int main(){long long x=9223372036854775807; x=x+1; cout<<x; return 0;}", "");
        assert_eq!(r.stdout, "-9223372036854775808");
    }

    #[test]
    fn index_out_of_bounds() {
        let r = run("int main(){int a[3]; a[3]=1; return 0;}", "");
        assert_eq!(r.status, Status::RuntimeError(RuntimeReason::IndexOutOfBounds));
        let r = run("int main(){vector<int> v; cout<<v[0]; return 0;}", "");
        assert_eq!(r.status, Status::RuntimeError(RuntimeReason::IndexOutOfBounds));
    }

    #[test]
    fn references_recursion_and_strings() {
        let src = r#"
            void inc(int &x, int by) { x += by; }
            long long fact(int n) { if (n <= 1) return 1; return n * fact(n - 1); }
            int main() {
                int a = 1; inc(a, 4);
                vector<int> v(3, 7); inc(v[1], 1);
                string s; cin >> s; s[0] = 'J'; s = s + '!';
                cout << a << " " << v[1] << " " << fact(20) << " " << s << " " << s.substr(1, 3) << " " << s.size() << endl;
                swap(v[0], a);
                printf("%d %lld %.s%c %s\n", a, fact(3), 'x', s.c_str());
                return 0;
            }"#;
        let src = src.replace("%.s", "");
        let r = run(&src, "jam");
        assert_eq!(r.status, Status::Ok, "{:?}", r.message);
        assert_eq!(r.stdout, "5 8 2432902008176640000 Jam! am! 4\n7 6 x Jam!\n");
    }

    #[test]
    fn floats_and_formats() {
        let r = run("int main(){double d; scanf(\"%lf\", &d); cout<<d/3<<' '<<sqrt(2.0)<<endl; printf(\"%f %d\\n\", d, (int)d); return 0;}", "10");
        assert_eq!(r.stdout, "3.33333 1.41421\n10.000000 10\n");
    }

    #[test]
    fn char_io_and_casts() {
        let r =
            run("int main(){char c; cin>>c; int k=c; char d=c+1; cout<<c<<k<<d<<(char)(k+2)<<endl; return 0;}", "  a");
        assert_eq!(r.stdout, "a97bc\n");
    }

    #[test]
    fn loops_break_continue() {
        let src = "int main(){int s=0; for(int i=0;i<10;i++){ if(i%2) continue; if(i>6) break; s+=i;} int j=0; do { j++; } while(j<5); while(j>0){ j--; if(j==2) break; } cout<<s<<' '<<j; return 0;}";
        assert_eq!(run(src, "").stdout, "12 2");
    }

    #[test]
    fn deep_recursion_hits_depth_limit() {
        let r = run("int f(int n){return f(n+1);} int main(){return f(0);}", "");
        assert_eq!(r.status, Status::ResourceLimit);
    }

    #[test]
    fn repeated_runs_identical() {
        let src = "int main(){int n; cin>>n; vector<int> v; for(int i=0;i<n;i++){int x; cin>>x; v.push_back(x*x);} long long t=0; for(int i=0;i<n;i++) t+=v[i]; cout<<t<<endl; return 0;}";
        let p = parse_source(src).unwrap();
        let first = execute(&p, "4 1 2 3 4", Limits::default());
        assert_eq!(first.stdout, "30\n");
        for _ in 0..100 {
            assert_eq!(execute(&p, "4 1 2 3 4", Limits::default()), first);
        }
    }
}
