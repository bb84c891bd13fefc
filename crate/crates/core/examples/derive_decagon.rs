//! Reads Z-table parameters off the horizontal cylinders of the regular
//! decagon normalized into Q(sqrt 5).
//!
//! The decagon is first mapped into Q(sqrt 5) by `diag(1, 1/sin(pi/5))` and
//! rotated so that its three-cylinder direction is horizontal. Twists are
//! only defined up to full Dehn twists, and the second conjugate equation
//! depends on the representatives, so the surface is sheared by the
//! smallest `u^c` (c = j/8) after which the normalized twists satisfy it.
//! The resulting parameters are rebuilt as a Z-table and compared with the
//! sheared decagon up to cut-and-paste.

use flatlab::constructions::{decagon_polygon_q5, z_table, ZTableParams};
use flatlab::cylinders::{check_lm, periodic_direction_decompose, Direction, LmVerdict, DEFAULT_TRACE_BUDGET};
use flatlab::Mat2;

fn main() {
    let base = decagon_polygon_q5();
    let k = base.field();
    println!("area {}", base.area());
    let mut cands: Vec<i64> = (0..=64).flat_map(|j| [j, -j]).collect();
    cands.dedup();
    for j in cands {
        let c = k.rat(j, 8);
        let s = base.apply_sl2(&Mat2::horocycle(&c)).unwrap();
        let dec = periodic_direction_decompose(&s, &Direction::horizontal(k), DEFAULT_TRACE_BUDGET)
            .expect("horizontal direction is periodic");
        let np = dec.normalized.clone().expect("three cylinders with a width relation");
        let verdict = check_lm(&np).unwrap();
        println!("c = {c}: {verdict:?}");
        if let LmVerdict::Member { m } = verdict {
            let [i, j2, l] = np.order;
            let cy = &dec.cylinders;
            let p = ZTableParams {
                w1: cy[i].w.clone(),
                w2: cy[j2].w.clone(),
                h1: cy[i].h.clone(),
                h2: cy[j2].h.clone(),
                h3: cy[l].h.clone(),
                t1: cy[i].t.clone(),
                t2: cy[j2].t.clone(),
                t3: cy[l].t.clone(),
            };
            println!("shear c = {c}, m = {m}");
            println!("{p:#?}");
            let z = z_table(&p).unwrap();
            println!("z-table isomorphic to sheared decagon: {}", z.is_isomorphic(&s).unwrap());
            let mirrored = z_table(&ZTableParams { t1: p.t2.clone(), t2: p.t1.clone(), w1: p.w2.clone(), w2: p.w1.clone(), h1: p.h2.clone(), h2: p.h1.clone(), ..p.clone() }).unwrap();
            println!("swapped z-table isomorphic: {}", mirrored.is_isomorphic(&s).unwrap());
            break;
        }
    }
}
