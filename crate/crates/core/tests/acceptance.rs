//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand_core::RngCore;

use alink::affine::{affine_eval_mod, synth_params, AffineParams};
use alink::analysis::{
    affine_grid, default_tol, detect_lines, fill_trend, intercept_clusters, shift_test,
    squaring_growth, verify_affine, DEFAULT_WINDOW,
};
use alink::links::{predict_affine, predict_const, Shape};
use alink::padic::{mult_ord, word_of_u64, word_value_u64, PAdicRational};
use alink::plot::{window, Mode, EXHAUSTIVE_BUDGET};
use alink::rng;
use alink::transducer::Transducer;
use alink::vanderput::{
    coeffset_probe, kernel_probe, reconstruct, vdp_coeffs, CoeffValue, ConstantOracle,
    GrowthStatus, IdentityOracle, KernelStatus, Oracle, TransducerOracle,
};

type Outcome = Result<String, String>;

const GRID_ABS: i64 = 20;
const GRID_BETAS: [i64; 5] = [1, 3, 5, 7, 9];
/// Sampled inputs per layer for line discovery.
const DETECT_SAMPLES: usize = 2048;
const DETECT_BOUND: i64 = 8;
const SEED: u64 = 0x5eed;

fn q(s: &str) -> PAdicRational {
    PAdicRational::parse(s, 2).unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid() -> Vec<AffineParams> {
    affine_grid(GRID_ABS, &GRID_BETAS, 2).unwrap()
}

fn fixtures() -> Vec<(&'static str, &'static str, usize)> {
    vec![("3/5", "1/3", 2), ("-2", "1/3", 2), ("3/5", "2/7", 3)]
}

fn union_fixture() -> Transducer {
    let a = synth_params(&AffineParams::new(&q("-2"), &q("1/3")).unwrap());
    let b = synth_params(&AffineParams::new(&q("3/5"), &q("2/7")).unwrap());
    Transducer::fork(&[a, b]).unwrap()
}

fn ac1() -> Outcome {
    let c = q("2/7").cset().map_err(|e| e.to_string())?;
    ensure(c.sorted() == vec![r(3, 7), r(5, 7), r(6, 7)], || {
        format!("cset = {:?}", c.sorted())
    })?;
    let p = predict_const(&q("2/7")).map_err(|e| e.to_string())?;
    ensure(p.shape == Shape::Parallels && p.knot_count == 3, || {
        format!("{p}")
    })?;
    Ok("cset(2/7) = {3/7, 5/7, 6/7}, 3 parallels".into())
}

fn ac2() -> Outcome {
    let p = predict_affine(&q("3/5"), &q("1/3")).map_err(|e| e.to_string())?;
    ensure(p.m == 3 && p.knot_count == 2, || format!("{p}"))?;
    let d = predict_affine(&q("7/15"), &q("2/5")).map_err(|e| e.to_string())?;
    ensure(d.knot_count == 1, || format!("{d}"))?;
    Ok("m = 3, 2 knots; b' | b gives 1 knot".into())
}

fn ac3() -> Outcome {
    let x = q("1/3");
    let pf = x.period_form();
    ensure(pf.period.len() == 2 && pf.preperiod == vec![1], || {
        format!("{pf:?}")
    })?;
    let c = x.crep();
    ensure(
        (c.c.clone(), c.d.clone(), c.t) == (BigInt::zero(), BigInt::from(1), 2),
        || format!("{c:?}"),
    )?;
    let e = x.mod1_expansion().map_err(|e| e.to_string())?;
    ensure(e == vec![0, 1], || format!("{e:?}"))?;
    Ok("period 2, preperiod [1], crep (0,1,2), expansion [0,1]".into())
}

fn ac4() -> Outcome {
    let mut rng = rng::seeded(SEED);
    let mut checked = 0;
    for p in [2u32, 3, 5] {
        let mut n = 0;
        while n < 200 {
            let a = rng::below(&mut rng, 2001) as i64 - 1000;
            let b = 1 + rng::below(&mut rng, 1000) as i64;
            if b % p as i64 == 0 || a.gcd(&b) != 1 {
                continue;
            }
            let z = PAdicRational::new(a, b, p).map_err(|e| e.to_string())?;
            let want = mult_ord(b as u64, p).map_err(|e| e.to_string())? as usize;
            ensure(z.period_len() == want, || {
                format!(
                    "{a}/{b} at p={p}: period {} vs order {want}",
                    z.period_len()
                )
            })?;
            n += 1;
        }
        checked += n;
    }
    Ok(format!("{checked} rationals over p = 2, 3, 5"))
}

fn ac5() -> Outcome {
    let g = grid();
    let mut mismatches = Vec::new();
    for params in &g {
        let t = synth_params(params);
        let (a, b) = (params.slope(), params.intercept());
        for x in 0..256u64 {
            let w = word_of_u64(x, 8, 2);
            let got = BigUint::from(word_value_u64(&t.run_word(&w), 2));
            if got != affine_eval_mod(&a, &b, &w) {
                mismatches.push(format!("({a}, {b}) at {x}"));
            }
        }
    }
    ensure(mismatches.is_empty(), || {
        format!(
            "{} mismatches, first {:?}",
            mismatches.len(),
            &mismatches[..mismatches.len().min(5)]
        )
    })?;
    Ok(format!("{} machines x 256 inputs", g.len()))
}

fn ac6() -> Outcome {
    let g = grid();
    let eps = r(1, 1 << 14);
    let mut worst_slack = None::<BigRational>;
    for params in &g {
        let t = synth_params(params);
        let rep = verify_affine(&t, params, 4, 14, EXHAUSTIVE_BUDGET).map_err(|e| e.to_string())?;
        ensure(rep.exact_congruence_pass, || {
            format!("{params:?} failed at {:?}", rep.failure)
        })?;
        let top = rep.layers.last().expect("layer 14");
        let bound = r(params.gamma.abs(), params.beta << 14) + &eps;
        ensure(top.max_distance <= bound, || {
            format!("{params:?}: distance {} above {}", top.max_distance, bound)
        })?;
        let slack = bound - &top.max_distance;
        if worst_slack.as_ref().is_none_or(|w| slack < *w) {
            worst_slack = Some(slack);
        }
        let wrong = AffineParams {
            gamma: params.gamma + 1,
            ..*params
        };
        let neg = verify_affine(&t, &wrong, 4, 8, EXHAUSTIVE_BUDGET).map_err(|e| e.to_string())?;
        ensure(!neg.exact_congruence_pass, || {
            format!("wrong gamma accepted for {params:?}")
        })?;
    }
    Ok(format!(
        "{} machines, k = 4..14, min slack {}",
        g.len(),
        worst_slack.map(|s| s.to_string()).unwrap_or_default()
    ))
}

fn ac7() -> Outcome {
    let mut seen = Vec::new();
    for (a, b, knots) in fixtures() {
        let t = synth_params(&AffineParams::new(&q(a), &q(b)).unwrap());
        let pts = window(
            &t,
            16,
            16 + DEFAULT_WINDOW - 1,
            Mode::Exhaustive,
            EXHAUSTIVE_BUDGET,
        )
        .map_err(|e| e.to_string())?;
        let slope = q(a).to_rational();
        let c = intercept_clusters(&pts, &slope, &default_tol()).map_err(|e| e.to_string())?;
        ensure(c.count() == knots, || {
            format!("({a}, {b}): {} clusters, want {knots}", c.count())
        })?;
        seen.push(format!("({a},{b})->{}", c.count()));
    }
    Ok(seen.join(" "))
}

fn exact(v: &CoeffValue) -> Result<&PAdicRational, String> {
    match v {
        CoeffValue::Exact(x) => Ok(x),
        other => Err(format!("expected an exact value, got {other}")),
    }
}

fn ac8() -> Outcome {
    let id = vdp_coeffs(&IdentityOracle(2), 1 << 12, 64).map_err(|e| e.to_string())?;
    for c in &id {
        let lead = if c.m == 0 {
            0
        } else {
            c.m >> (63 - c.m.leading_zeros())
        };
        ensure(
            *exact(&c.b)? == PAdicRational::from_integer(lead, 2).unwrap(),
            || format!("identity b_{} = {}", c.m, c.b),
        )?;
    }
    let third = q("1/3");
    let cc = vdp_coeffs(&ConstantOracle(third.clone()), 64, 64).map_err(|e| e.to_string())?;
    for c in &cc {
        let want = if c.m < 2 {
            third.clone()
        } else {
            PAdicRational::zero(2).unwrap()
        };
        ensure(*exact(&c.big_b)? == want, || {
            format!("constant B_{} = {}", c.m, c.big_b)
        })?;
    }
    let mut rng = rng::seeded(SEED ^ 8);
    for i in 0..20 {
        let states = 1 + rng::below(&mut rng, 6) as usize;
        let t = Transducer::random(2, 1, 1, states, &mut rng).map_err(|e| e.to_string())?;
        let coeffs = vdp_coeffs(&TransducerOracle::new(&t), 256, 64).map_err(|e| e.to_string())?;
        for x in 0..256u64 {
            let w = word_of_u64(x, 8, 2);
            let got = reconstruct(&coeffs, &w, 2).map_err(|e| e.to_string())?;
            ensure(
                got == BigUint::from(word_value_u64(&t.run_word(&w), 2)),
                || format!("machine {i}: series differs at {x}"),
            )?;
        }
    }
    Ok("identity, constant 1/3, 20 random machines".into())
}

fn ac9() -> Outcome {
    let g = grid();
    let mut max_classes = 0;
    let mut max_values = 0;
    for params in &g {
        let t = synth_params(params);
        let o = TransducerOracle::new(&t);
        let cs = coeffset_probe(&o, 1 << 12, 64).map_err(|e| e.to_string())?;
        ensure(cs.status == GrowthStatus::Stabilized, || {
            format!("{params:?}: {:?}", cs.growth)
        })?;
        max_values = max_values.max(cs.values.len());
        let seq = o.b_sequence(1 << 17).expect("machine oracles are exact");
        let k = kernel_probe(|m| seq.symbols[m as usize], 2, 6, 1024, 256)
            .map_err(|e| e.to_string())?;
        match k.status {
            KernelStatus::Finite(n) => max_classes = max_classes.max(n),
            KernelStatus::Undecided => return Err(format!("{params:?}: kernel undecided")),
        }
    }
    let sq = squaring_growth(1 << 16, 2).map_err(|e| e.to_string())?;
    let last = sq.last().expect("nonempty").1;
    ensure(
        last >= 100 && sq.windows(2).all(|w| w[1].1 > w[0].1),
        || format!("{sq:?}"),
    )?;
    Ok(format!(
        "{} machines, <= {max_values} coefficients, <= {max_classes} kernel classes; squaring {last}",
        g.len()
    ))
}

fn ac10() -> Outcome {
    let mut machines: Vec<(String, Transducer)> = fixtures()
        .into_iter()
        .map(|(a, b, _)| {
            (
                format!("({a},{b})"),
                synth_params(&AffineParams::new(&q(a), &q(b)).unwrap()),
            )
        })
        .collect();
    machines.push(("identity".into(), Transducer::identity(2).unwrap()));
    machines.push(("union".into(), union_fixture()));
    for (name, t) in &machines {
        let s = shift_test(t, 12, EXHAUSTIVE_BUDGET).map_err(|e| e.to_string())?;
        ensure(s.passed(), || {
            format!("{name}: shift fails at {:?}", s.failure)
        })?;
    }

    let add = Transducer::adder(2).unwrap();
    for x1 in 0..1u64 << 10 {
        let w1 = word_of_u64(x1, 10, 2);
        for x2 in 0..1u64 << 10 {
            let out = add
                .run(&[w1.clone(), word_of_u64(x2, 10, 2)])
                .map_err(|e| e.to_string())?;
            ensure(word_value_u64(&out[0], 2) == (x1 + x2) % 1024, || {
                format!("{x1} + {x2}")
            })?;
        }
    }

    let mut trends = Vec::new();
    for (name, t) in machines.iter().take(fixtures().len()) {
        let f = fill_trend(t, &[64, 256], 18, EXHAUSTIVE_BUDGET).map_err(|e| e.to_string())?;
        ensure(f.ratios[1].1 <= 0.5 * f.ratios[0].1, || {
            format!("{name}: {:?}", f.ratios)
        })?;
        trends.push(format!("{:.3}", f.trend));
    }
    Ok(format!(
        "shift ok on {} machines, adder ok, fill trends {}",
        machines.len(),
        trends.join(" ")
    ))
}

fn detect_window(t: &Transducer, rng: &mut impl RngCore) -> alink::plot::PlotSet {
    let mode = Mode::Sampled {
        n: DETECT_SAMPLES,
        seed: rng.next_u64(),
    };
    window(t, 16, 16 + DEFAULT_WINDOW - 1, mode, EXHAUSTIVE_BUDGET).unwrap()
}

fn ac11() -> Outcome {
    let tol = default_tol();
    let mut rng = rng::seeded(SEED ^ 11);
    let mut tested = 0;
    let mut failures = Vec::new();
    for params in grid() {
        let slope = params.slope().to_rational();
        if slope.numer().magnitude() > &BigUint::from(DETECT_BOUND as u64)
            || slope.denom() > &BigInt::from(DETECT_BOUND)
        {
            continue;
        }
        tested += 1;
        let t = synth_params(&params);
        let pred =
            predict_affine(&params.slope(), &params.intercept()).map_err(|e| e.to_string())?;
        let found = detect_lines(
            &detect_window(&t, &mut rng),
            DETECT_BOUND,
            DETECT_BOUND,
            &tol,
        )
        .map_err(|e| e.to_string())?;
        let ok = found
            .first()
            .is_some_and(|c| c.slope == slope && c.intercepts.len() == pred.knot_count);
        if !ok {
            failures.push(format!(
                "({}, {}): want {} x{}, got {}",
                params.slope(),
                params.intercept(),
                slope,
                pred.knot_count,
                found
                    .first()
                    .map(|c| c.to_string())
                    .unwrap_or("nothing".into())
            ));
        }
    }
    let u = detect_lines(
        &detect_window(&union_fixture(), &mut rng),
        DETECT_BOUND,
        DETECT_BOUND,
        &tol,
    )
    .map_err(|e| e.to_string())?;
    let mut slopes: Vec<BigRational> = u.iter().map(|c| c.slope.clone()).collect();
    slopes.sort();
    if slopes != vec![r(-2, 1), r(3, 5)] {
        failures.push(format!("union: slopes {slopes:?}"));
    }
    ensure(failures.is_empty(), || {
        format!(
            "{} failures, first {:?}",
            failures.len(),
            &failures[..failures.len().min(5)]
        )
    })?;
    Ok(format!("{tested} grid machines and the union fixture"))
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let ms = Duration::from_millis;
    let s = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        ("AC1", "constant parallels", ms(1), ac1),
        ("AC2", "affine knot count", ms(1), ac2),
        ("AC3", "period form of 1/3", ms(1), ac3),
        ("AC4", "period length is the order", s(1), ac4),
        ("AC5", "affine synthesis oracle", s(30), ac5),
        ("AC6", "exact link verification", s(60), ac6),
        ("AC7", "knot counting", s(10), ac7),
        ("AC8", "van der Put coefficients", s(30), ac8),
        ("AC9", "finiteness probes", s(60), ac9),
        ("AC10", "structural properties", s(60), ac10),
        ("AC11", "line discovery", s(120), ac11),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC"))
        .collect();
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let (tag, detail) = match result {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] {id} {name}: {detail} ({elapsed:.3?})");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
