//! SVG rendering of carpet prefixes.

use std::fmt::Write;

use carpet_lab::classify::ve_witness;
use carpet_lab::scalar::fixed_decimal;
use carpet_lab::{Carpet, Rational};
use num_bigint::BigInt;

pub const MAX_RENDER_DEPTH: u32 = 6;

/// Radius of the overlay markers in unit-square coordinates.
const MARK_RADIUS: &str = "0.006";

#[derive(Debug)]
pub struct TooDeep(pub u32);

fn dec(num: &BigInt, den: &BigInt, places: u32) -> String {
    let s = fixed_decimal(&Rational::new(num.clone(), den.clone()), places);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// All rank-`depth` cylinders as filled rectangles in `viewBox="0 0 1 1"`,
/// with `y` pointing up. `overlay` marks the `V_E` witness point when one
/// exists.
pub fn render_carpet(carpet: &Carpet, depth: u32, places: u32, overlay: bool) -> Result<String, TooDeep> {
    if depth > MAX_RENDER_DEPTH {
        return Err(TooDeep(depth));
    }
    let nd = BigInt::from(carpet.n()).pow(depth);
    let md = BigInt::from(carpet.m()).pow(depth);
    let w = dec(&BigInt::from(1), &nd, places);
    let h = dec(&BigInt::from(1), &md, places);
    let mut out = String::new();
    out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"512\" height=\"512\">\n");
    out.push_str("<!-- schema: carpet-lab/1 -->\n");
    writeln!(out, "<desc>n={} m={} depth={} cells={}</desc>", carpet.n(), carpet.m(), depth, carpet.big_n().pow(depth))
        .unwrap();
    out.push_str("<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.002\"/>\n");
    out.push_str("<g fill=\"#6f8fd8\" shape-rendering=\"crispEdges\">\n");
    let digits = carpet.digits();
    let mut idx = vec![0usize; depth as usize];
    loop {
        let (mut x, mut y) = (BigInt::from(0), BigInt::from(0));
        for &t in &idx {
            x = x * carpet.n() + digits[t].i;
            y = y * carpet.m() + digits[t].j;
        }
        // SVG y grows downward: the top edge is 1 - (y + 1) / m^depth.
        let top = &md - &y - 1;
        writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{h}\"/>",
            dec(&x, &nd, places),
            dec(&top, &md, places)
        )
        .unwrap();
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                out.push_str("</g>\n");
                if overlay {
                    push_overlay(&mut out, carpet, places);
                }
                out.push_str("</svg>\n");
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < digits.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn push_overlay(out: &mut String, carpet: &Carpet, places: u32) {
    let Some(w) = ve_witness(carpet) else { return };
    let p = w.first.pi(carpet);
    let one = Rational::from_integer(1.into());
    let y = &one - &p.y;
    writeln!(
        out,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{MARK_RADIUS}\" fill=\"#d83a3a\"/>",
        dec(p.x.numer(), p.x.denom(), places),
        dec(y.numer(), y.denom(), places)
    )
    .unwrap();
}
