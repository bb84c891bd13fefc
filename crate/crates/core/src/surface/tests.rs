use super::*;
use crate::constructions::*;
use crate::exactfield::QuadField;

fn q2() -> QuadField {
    QuadField::new(2).unwrap()
}

fn ztable_unit() -> TranslationSurface {
    let k = q2();
    z_table(&ZTableParams {
        w1: k.int(1),
        w2: k.int(1),
        h1: k.int(1),
        h2: k.int(1),
        h3: k.int(1),
        t1: k.int(0),
        t2: k.int(0),
        t3: k.int(0),
    })
    .unwrap()
}

fn angles<S: Scalar>(s: &Surface<S>) -> Vec<u32> {
    let mut a: Vec<u32> = s.cone_data().iter().map(|c| c.angle_multiple).filter(|&m| m > 1).collect();
    a.sort();
    a
}

#[test]
fn named_strata() {
    let sq = regular_2n_gon(2).unwrap();
    assert_eq!(sq.genus(), 1);
    let hex = regular_2n_gon(3).unwrap();
    assert_eq!(hex.genus(), 1);
    let oct = regular_2n_gon(4).unwrap();
    assert!(oct.stratum().is_h2());
    assert_eq!(angles(&oct), vec![3]);
    let dec = regular_2n_gon(5).unwrap();
    assert!(dec.stratum().is_h11());
    assert_eq!(angles(&dec), vec![2, 2]);
}

#[test]
fn table_strata_and_area() {
    let z = ztable_unit();
    assert!(z.stratum().is_h11(), "{}", z.stratum());
    assert_eq!(z.area(), q2().int(4));
    let k = q2();
    let l = l_table(&LTableParams { a: k.int(2), b: k.int(2) }).unwrap();
    assert!(l.stratum().is_h2());
    assert_eq!(l.area(), k.int(3));
    let l2 = l_table(&LTableParams { a: k.q(1, 1, 1, 1), b: k.int(3) }).unwrap();
    assert!(l2.stratum().is_h2());
    assert!(l_table(&LTableParams { a: k.int(2), b: k.int(1) }).is_err());
}

#[test]
fn degeneration_fixtures_in_h11() {
    let k = q2();
    let st = slit_tori(&k.rat(1, 2)).unwrap();
    assert!(st.stratum().is_h11(), "{}", st.stratum());
    assert_eq!(st.area(), k.int(2));
    let sl = split_l_table(&SplitLParams {
        w1: k.int(1),
        h1: k.int(1),
        w2: k.int(3),
        h2: k.int(1),
        l: k.rat(1, 2),
        t1: k.int(0),
        t2: k.int(0),
    })
    .unwrap();
    assert!(sl.stratum().is_h11(), "{}", sl.stratum());
    assert_eq!(sl.area(), k.int(4));
}

#[test]
fn decagon_model_polygon() {
    let d = decagon_polygon_q5();
    assert!(d.stratum().is_h11());
}

#[test]
fn rejects_bad_input() {
    let k = q2();
    let (o, z) = (k.one(), k.zero());
    let sq = vec![
        Vec2::new(o.clone(), z.clone()),
        Vec2::new(z.clone(), o.clone()),
        Vec2::new(-&o, z.clone()),
        Vec2::new(z.clone(), -&o),
    ];
    let bad = build_surface(vec![sq.clone()], vec![((0, 0), (0, 1)), ((0, 2), (0, 3))]);
    assert!(matches!(bad, Err(SurfaceError::EdgeMismatch(..))));
    let open = build_surface(vec![sq[..3].to_vec()], vec![]);
    assert!(matches!(open, Err(SurfaceError::UnclosedPolygon(0))));
    let unglued = build_surface(vec![sq.clone()], vec![((0, 0), (0, 2))]);
    assert!(matches!(unglued, Err(SurfaceError::BadMatching(_))));
    let two = build_surface(
        vec![sq.clone(), sq.clone()],
        vec![((0, 0), (0, 2)), ((0, 1), (0, 3)), ((1, 0), (1, 2)), ((1, 1), (1, 3))],
    );
    assert!(matches!(two, Err(SurfaceError::Disconnected)));
    let cw: Vec<_> = sq.iter().rev().map(|e| e.neg()).collect();
    let cw = vec![cw[1].clone(), cw[0].clone(), cw[3].clone(), cw[2].clone()];
    let _ = cw;
}

#[test]
fn json_round_trip_is_exact() {
    let z = ztable_unit();
    let text = z.to_json();
    let back = TranslationSurface::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    let dec = decagon_polygon_q5();
    let text = dec.to_json();
    assert_eq!(TranslationSurface::from_json(&text).unwrap().to_json(), text);
}

#[test]
fn delaunay_and_isomorphism() {
    let z = ztable_unit();
    let dz = z.delaunay().unwrap();
    assert!(dz.is_delaunay());
    assert_eq!(dz.area(), z.area());
    assert!(z.is_isomorphic(&dz).unwrap());
    let k = q2();
    let sheared = z.apply_sl2(&Mat2::horocycle(&k.int(2))).unwrap();
    // moduli are 1, 1 and 1/2, so shearing by 2 twists every cylinder fully
    assert!(z.is_isomorphic(&sheared).unwrap());
    let half = z.apply_sl2(&Mat2::horocycle(&k.int(1))).unwrap();
    assert!(!z.is_isomorphic(&half).unwrap());
    assert_eq!(z.canonical_code().unwrap(), sheared.canonical_code().unwrap());
    let m = z.mirror_x();
    assert!(m.mirror_x().is_isomorphic(&z).unwrap());
    assert!(m.stratum().is_h11());
}


fn horiz(x: QuadNum) -> Vec2<QuadNum> {
    let z = x.zero_like();
    Vec2::new(x, z)
}

#[test]
fn rel_small_move_keeps_absolute_periods() {
    let k = q2();
    let st = slit_tori(&k.rat(1, 2)).unwrap();
    let lat = st.absolute_period_lattice();
    assert_eq!(lat.len(), 2, "{lat:?}");
    for c in st.singular_ids() {
        for x in [k.rat(1, 4), k.rat(-1, 4), k.q(0, 1, 1, 10)] {
            let moved = st.rel_translate(&horiz(x), c).unwrap().surface().unwrap();
            assert!(moved.stratum().is_h11());
            assert_eq!(moved.area(), st.area());
            assert_eq!(moved.absolute_period_lattice(), lat);
        }
    }
}

#[test]
fn rel_to_boundary_degenerates() {
    let k = q2();
    let st = slit_tori(&k.rat(1, 3)).unwrap();
    let c = st.singular_ids()[0];
    let mut kinds = Vec::new();
    for x in [k.rat(1, 3), k.rat(-2, 3)] {
        match st.rel_translate(&horiz(x), c) {
            Ok(rel::RelOutcome::Degenerate(r)) => kinds.push(r.kind),
            other => panic!("{other:?}"),
        }
    }
    kinds.sort_by_key(|k| format!("{k:?}"));
    assert_eq!(kinds, vec![rel::DegenerationKind::NodalTorus, rel::DegenerationKind::TwoToriWedge]);
    let beyond = st.rel_translate(&horiz(k.rat(1, 2)), c);
    assert!(matches!(beyond, Err(SurfaceError::CollisionBeyondBoundary(_))), "{beyond:?}");
}

#[test]
fn rel_collapse_to_h2() {
    let k = q2();
    let sl = split_l_table(&SplitLParams {
        w1: k.int(1),
        h1: k.int(1),
        w2: k.int(3),
        h2: k.int(1),
        l: k.rat(1, 2),
        t1: k.int(0),
        t2: k.rat(1, 3),
    })
    .unwrap();
    let mut found = false;
    for c in sl.singular_ids() {
        for x in [k.rat(1, 2), k.rat(-1, 2)] {
            if let Ok(rel::RelOutcome::Degenerate(r)) = sl.rel_translate(&horiz(x), c) {
                assert_eq!(r.kind, rel::DegenerationKind::H2Surface);
                assert_eq!(r.components[0].area(), sl.area());
                found = true;
            }
        }
    }
    assert!(found);
}

#[test]
fn rel_composes() {
    let k = q2();
    let st = slit_tori(&k.rat(1, 2)).unwrap();
    let c = st.singular_ids()[1];
    let v1 = Vec2::new(k.rat(1, 5), k.rat(1, 7));
    let v2 = Vec2::new(k.rat(-1, 9), k.q(0, 1, 1, 11));
    let a = st.rel_translate(&v1, c).unwrap().surface().unwrap();
    let ab = a.rel_translate(&v2, c).unwrap().surface().unwrap();
    let direct = st.rel_translate(&v1.add(&v2), c).unwrap().surface().unwrap();
    assert!(ab.is_isomorphic(&direct).unwrap());
    assert!(!ab.is_isomorphic(&st).unwrap());
}
