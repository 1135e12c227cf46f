//! Verb-object-complement rules over the controlled step grammar.
//!
//! A verb opens a group; following nouns (and adjectives) form the widget
//! phrase; the first quoted literal fills the parameter of an operation that
//! takes one, otherwise it becomes part of the phrase. A noun that follows a
//! filled parameter opens an elliptical group reusing the verb, which covers
//! "input the username 'a' and password 'b'".

use serde::{Deserialize, Serialize};

use super::analyzer::{TextAnalyzer, Token};
use super::{Operation, TextError};
use crate::screen::WidgetType;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpTriple {
    pub operation: Operation,
    pub widget_phrase: String,
    pub parameter: Option<String>,
}

impl OpTriple {
    pub fn new(operation: Operation, widget_phrase: &str, parameter: Option<&str>) -> Self {
        OpTriple { operation, widget_phrase: widget_phrase.to_string(), parameter: parameter.map(str::to_string) }
    }
}

struct Group {
    op: Operation,
    phrase: Vec<String>,
    param: Option<String>,
}

impl Group {
    fn new(op: Operation) -> Self {
        Group { op, phrase: Vec::new(), param: None }
    }

    fn finish(self, out: &mut Vec<OpTriple>) {
        if !self.phrase.is_empty() {
            out.push(OpTriple { operation: self.op, widget_phrase: self.phrase.join(" "), parameter: self.param });
        }
    }
}

/// One triple per verb-object group in sentence order. Groups without any
/// object are dropped; a token stream without a verb is unparsable.
pub fn parse_step(analyzer: &TextAnalyzer, tokens: &[Token]) -> Result<Vec<OpTriple>, TextError> {
    let mut out = Vec::new();
    let mut cur: Option<Group> = None;
    let mut saw_verb = false;
    for tok in tokens {
        if let Some(op) = analyzer.operation_of(tok) {
            saw_verb = true;
            if let Some(g) = cur.take() {
                g.finish(&mut out);
            }
            cur = Some(Group::new(op));
            continue;
        }
        let Some(g) = cur.as_mut() else { continue };
        if tok.literal {
            if g.op.takes_parameter() && g.param.is_none() {
                g.param = Some(tok.text.clone());
            } else {
                g.phrase.push(tok.text.to_lowercase());
            }
        } else if g.op.takes_parameter() && g.param.is_some() {
            let op = g.op;
            cur.take().unwrap().finish(&mut out);
            let mut next = Group::new(op);
            next.phrase.push(tok.text.clone());
            cur = Some(next);
        } else {
            g.phrase.push(tok.text.clone());
        }
    }
    if let Some(g) = cur {
        g.finish(&mut out);
    }
    if !saw_verb {
        let text = tokens.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
        return Err(TextError::UnparsableStep(text));
    }
    Ok(out)
}

/// Trailing noun naming a widget kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeNoun {
    Widget(WidgetType),
    /// "option", "item", "tab", "link": stripped from the label but naming
    /// no concrete type.
    Generic,
}

fn type_noun(canonical: &str) -> Option<TypeNoun> {
    use WidgetType::*;
    Some(match canonical {
        "button" => TypeNoun::Widget(Button),
        "textfield" | "field" => TypeNoun::Widget(TextField),
        "checkbox" => TypeNoun::Widget(Checkbox),
        "icon" => TypeNoun::Widget(Icon),
        "image" | "picture" => TypeNoun::Widget(ImageView),
        "label" | "text" => TypeNoun::Widget(TextView),
        "option" | "item" | "tab" | "link" | "entry" => TypeNoun::Generic,
        _ => return None,
    })
}

/// Splits a widget phrase into its head and trailing type noun. A phrase
/// consisting of the type noun alone keeps it as the head.
pub fn split_type_noun(analyzer: &TextAnalyzer, phrase: &str) -> (String, Option<TypeNoun>) {
    let words: Vec<Token> = analyzer.segment(phrase);
    if let [head @ .., last] = words.as_slice() {
        if !head.is_empty() {
            if let Some(t) = type_noun(analyzer.canonical(&last.text)) {
                let head = head.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
                return (head, Some(t));
            }
        }
    }
    (phrase.to_string(), None)
}
