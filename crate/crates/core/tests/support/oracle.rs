//! Brute-force tag interpreter used as an oracle for the engine.
//!
//! Written directly over tag strings with its own state encoding; it shares
//! no code with the library. Actors are inferred the same way the tag
//! language defines them (only party allowed; `Q` for `BA`).

#![allow(dead_code)]

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum P {
    Q,
    E,
}

impl P {
    fn flip(self) -> P {
        match self {
            P::Q => P::E,
            P::E => P::Q,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum F {
    QPosed { given: bool },
    Clarify { given: bool },
    Explained,
    QAff,
    BothAff,
    APosed { by: P, countered: bool },
    AExpl,
    AAff,
}

fn terminal(f: F) -> bool {
    matches!(
        f,
        F::Explained | F::QAff | F::BothAff | F::AAff | F::APosed { countered: true, .. }
    )
}

/// Outcome of running a tag sequence: `Err(i)` is the 1-based index of the
/// first rejected tag; `Ok(complete)` otherwise.
pub fn run(tags: &[&str]) -> Result<bool, usize> {
    let mut stack: Vec<F> = Vec::new();
    for (i, &t) in tags.iter().enumerate() {
        let top = stack.last().copied();
        let ok = match (top, t) {
            (None, "BQ") => {
                stack.push(F::QPosed { given: false });
                true
            }
            (None, "BE") => {
                stack.push(F::Explained);
                true
            }
            (Some(F::QPosed { given: false }), "E") => set(&mut stack, F::Explained),
            (Some(F::QPosed { given: true }), "FE") => set(&mut stack, F::Explained),
            (Some(F::QPosed { given }), "RQ") => set(&mut stack, F::Clarify { given }),
            (Some(F::Clarify { given }), "CL") => set(&mut stack, F::QPosed { given }),
            (Some(F::Explained), "AF") => set(&mut stack, F::QAff),
            (Some(F::QAff), "AF") => set(&mut stack, F::BothAff),
            (Some(F::Explained | F::QAff), "RQ") => set(&mut stack, F::QPosed { given: true }),
            (Some(F::Explained | F::QAff | F::BothAff), "BA") => {
                stack.push(F::APosed {
                    by: P::Q,
                    countered: false,
                });
                true
            }
            (Some(F::Explained | F::QAff | F::BothAff), "EE") => {
                stack.pop();
                true
            }
            (Some(F::APosed { .. }), "AA") => set(&mut stack, F::AAff),
            (Some(F::APosed { by, .. }), "CA") => set(
                &mut stack,
                F::APosed {
                    by: by.flip(),
                    countered: true,
                },
            ),
            (Some(F::APosed { .. }), "FE") => set(&mut stack, F::AExpl),
            (Some(F::AExpl), "AA") => set(&mut stack, F::AAff),
            (Some(F::AExpl), "CA") => set(
                &mut stack,
                F::APosed {
                    by: P::Q,
                    countered: true,
                },
            ),
            (Some(F::APosed { countered: true, .. } | F::AAff), "EA") => {
                stack.pop();
                set(&mut stack, F::Explained)
            }
            _ => false,
        };
        if !ok {
            return Err(i + 1);
        }
    }
    Ok(stack.iter().all(|&f| terminal(f)))
}

fn set(stack: &mut [F], f: F) -> bool {
    *stack.last_mut().expect("open frame") = f;
    true
}

pub const ALPHABET: [&str; 12] = ["BQ", "BE", "E", "FE", "AF", "RQ", "CL", "BA", "AA", "CA", "EA", "EE"];

/// Calls `f` on every sequence over [`ALPHABET`] of length `0..=max_len`.
pub fn for_each_sequence(max_len: usize, mut f: impl FnMut(&[&str])) {
    let mut seq: Vec<&str> = Vec::with_capacity(max_len);
    fn rec<'a>(seq: &mut Vec<&'a str>, max_len: usize, f: &mut dyn FnMut(&[&'a str])) {
        f(seq);
        if seq.len() == max_len {
            return;
        }
        for t in ALPHABET {
            seq.push(t);
            rec(seq, max_len, f);
            seq.pop();
        }
    }
    rec(&mut seq, max_len, &mut f);
}
