//! Sequence expressions over the block index `n`.
//!
//! Grammar: numbers, `n`, `+ - * /`, unary minus, parentheses and the calls
//! `pow(a, b)`, `exp(a)`, `log(a)`, `min(a, b, ...)`, `max(a, b, ...)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    /// `column` is 1-based, counted in characters.
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("domain error at n = {n}: {message}")]
    Domain { n: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Pow,
    Exp,
    Log,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "pow" => Func::Pow,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn arity_ok(self, k: usize) -> bool {
        match self {
            Func::Pow => k == 2,
            Func::Exp | Func::Log => k == 1,
            Func::Min | Func::Max => k >= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    N,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression, evaluated with [`Expr::eval`].
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn syntax(column: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| syntax(col, format!("malformed number `{s}`")))?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(syntax(col, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek().0 == Tok::Op(op) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            Ok(())
        } else {
            let (t, col) = self.peek().clone();
            Err(syntax(col, format!("expected `{op}`, found {}", describe(&t))))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let (tok, col) = self.next();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "n" => Ok(Node::N),
            Tok::Ident(name) => {
                let f = Func::lookup(&name)
                    .ok_or_else(|| syntax(col, format!("unknown name `{name}`")))?;
                self.expect('(')?;
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                if !f.arity_ok(args.len()) {
                    return Err(syntax(
                        col,
                        format!("`{name}` does not take {} argument(s)", args.len()),
                    ));
                }
                Ok(Node::Call(f, args))
            }
            other => Err(syntax(col, format!("expected a value, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

fn eval_node(node: &Node, n: usize) -> Result<f64, ExprError> {
    let domain = |message: String| ExprError::Domain { n, message };
    let v = match node {
        Node::Num(v) => *v,
        Node::N => n as f64,
        Node::Neg(a) => -eval_node(a, n)?,
        Node::Add(a, b) => eval_node(a, n)? + eval_node(b, n)?,
        Node::Sub(a, b) => eval_node(a, n)? - eval_node(b, n)?,
        Node::Mul(a, b) => eval_node(a, n)? * eval_node(b, n)?,
        Node::Div(a, b) => {
            let d = eval_node(b, n)?;
            if d == 0.0 {
                return Err(domain("division by zero".into()));
            }
            eval_node(a, n)? / d
        }
        Node::Call(f, args) => {
            let xs = args
                .iter()
                .map(|a| eval_node(a, n))
                .collect::<Result<Vec<_>, _>>()?;
            match f {
                Func::Pow => xs[0].powf(xs[1]),
                Func::Exp => xs[0].exp(),
                Func::Log => {
                    if xs[0] <= 0.0 {
                        return Err(domain(format!("log of nonpositive value {}", xs[0])));
                    }
                    xs[0].ln()
                }
                Func::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
                Func::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("non-finite value {v}")))
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let mut lx = Lexer {
            toks: lex(text)?,
            pos: 0,
        };
        let root = lx.expr()?;
        let (tok, col) = lx.peek().clone();
        if tok != Tok::End {
            return Err(syntax(col, format!("unexpected {}", describe(&tok))));
        }
        Ok(Expr {
            source: text.to_string(),
            root,
        })
    }

    pub fn constant(v: f64) -> Expr {
        Expr {
            source: format!("{v}"),
            root: Node::Num(v),
        }
    }

    pub fn eval(&self, n: usize) -> Result<f64, ExprError> {
        eval_node(&self.root, n)
    }

    /// Values at `n = 1..=len`, failing at the first index outside the domain.
    pub fn eval_window(&self, len: usize) -> Result<Vec<f64>, ExprError> {
        (1..=len).map(|n| self.eval(n)).collect()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
