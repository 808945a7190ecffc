use super::{BinOp, Constant, Context, Expr, Func, Var};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        // Positions are 0-based byte offsets; end of input is `text.len()`.
        let pos = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                position: pos,
                message: format!("malformed number '{lit}'"),
            })?;
            tokens.push((pos, Token::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((pos, Token::Ident(text[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                _ => {
                    return Err(ParseError::Syntax {
                        position: pos,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            };
            tokens.push((pos, tok));
            i += 1;
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
    context: Context,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(p, _)| *p)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.cursor += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            // Right associative: the exponent is a full unary (which itself
            // may contain a power).
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let position = self.position();
        match self.tokens.get(self.cursor).cloned() {
            None => self.syntax("unexpected end of input"),
            Some((_, Token::Num(v))) => {
                self.cursor += 1;
                Ok(Expr::Num(v))
            }
            Some((_, Token::LParen)) => {
                self.cursor += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.cursor += 1;
                        Ok(inner)
                    }
                    _ => self.syntax("expected ')'"),
                }
            }
            Some((_, Token::Ident(name))) => {
                self.cursor += 1;
                self.identifier(&name, position)
            }
            Some((_, Token::RParen)) => self.syntax("unexpected ')'"),
            Some((_, Token::Op(c))) => self.syntax(format!("unexpected operator '{c}'")),
        }
    }

    fn identifier(&mut self, name: &str, position: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(&Token::LParen) {
                return self.syntax(format!(
                    "function '{name}' requires a parenthesised argument"
                ));
            }
            if func == Func::Abs && self.context == Context::Complex {
                return Err(ParseError::Syntax {
                    position,
                    message: "abs is not holomorphic and is not allowed in complex context".into(),
                });
            }
            self.cursor += 1;
            let arg = self.expr()?;
            if self.peek() != Some(&Token::RParen) {
                return self.syntax("expected ')'");
            }
            self.cursor += 1;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let var = match name {
            "x" => Var::X,
            "y" => Var::Y,
            "z" => Var::Z,
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "i" if self.context == Context::Complex => return Ok(Expr::Const(Constant::I)),
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    position,
                    context: self.context.describe(),
                })
            }
        };
        if !self.context.allows(var) {
            return Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                position,
                context: self.context.describe(),
            });
        }
        Ok(Expr::Var(var))
    }
}

/// Parses `text` into an expression tree, rejecting variables not allowed in
/// `context`.
///
/// Precedence: `^` binds tighter than unary minus, which binds tighter than
/// `*` `/`, which bind tighter than `+` `-`. `^` is right associative. There
/// is no implicit multiplication.
pub fn parse(text: &str, context: Context) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: text.len(),
        context,
    };
    let expr = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return parser.syntax("unexpected trailing input");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse(s, Context::Real).unwrap()
    }

    #[test]
    fn grammar_basics() {
        assert_eq!(
            p("x^2+1"),
            Expr::binary(
                BinOp::Add,
                Expr::binary(BinOp::Pow, Expr::Var(Var::X), Expr::Num(2.0)),
                Expr::Num(1.0)
            )
        );
        // right associative power
        assert_eq!(p("x^y^2"), p("x^(y^2)"));
        // unary minus binds looser than ^
        assert_eq!(p("-x^2"), Expr::Neg(Box::new(p("x^2"))));
        assert_eq!(p("2*-x"), Expr::binary(BinOp::Mul, Expr::Num(2.0), p("-x")));
        assert_eq!(p("1.5e-3"), Expr::Num(1.5e-3));
    }

    #[test]
    fn unbalanced_paren_reports_position() {
        match parse("(", Context::Real) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 1),
            other => panic!("{other:?}"),
        }
        match parse("x+*y", Context::Real) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(matches!(
            parse("2x", Context::Real),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn context_rules() {
        assert!(matches!(
            parse("-x", Context::FunctionOfY),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(parse("z^2+i", Context::Complex).is_ok());
        assert!(parse("i", Context::Real).is_err());
        assert!(parse("z", Context::Real).is_err());
        assert!(parse("abs(z)", Context::Complex).is_err());
        assert!(matches!(
            parse("foo(x)", Context::Real),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn render_round_trip_example() {
        let e = p("2+x*y");
        assert_eq!(p(&e.render()), e);
        for s in [
            "-(x+y)*2",
            "(x-y)-(x-y)",
            "x^-2",
            "(-x)^2",
            "(x^2)^3",
            "sin(x)/(y*x)",
            "--x",
        ] {
            let e = p(s);
            assert_eq!(p(&e.render()), e, "{s} -> {}", e.render());
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Var(Var::X)),
            Just(Expr::Var(Var::Y)),
            Just(Expr::Const(Constant::Pi)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow)
            ];
            let funcs = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sqrt),
                Just(Func::Abs)
            ];
            prop_oneof![
                (ops, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (funcs, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_render_is_identity(e in arb_expr()) {
            let text = e.render();
            let back = parse(&text, Context::Real).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
