//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use quake_lab_core::hyp2::{
    axis_endpoints, translation_along, translation_length, AngleConvention, Geodesic, Isometry,
};
use quake_lab_core::lamination::{LeafSpec, MeasuredLamination};
use quake_lab_core::pants::TwoPantsBlock;
use quake_lab_core::quake::{
    deform, deformed_cuff_holonomy, ln_trace_formula_excess, DeformedBlockState, PrecisionPolicy,
};
use quake_lab_core::spectrum::{
    default_counterexample, necessity_report, path_scan, BlockFamily,
    Necessity, PathScanReport, DEFAULT_DIP_THRESHOLD,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Everything the suite deforms, for the criteria quantified over all states.
#[derive(Default)]
struct Ledger {
    states: Vec<(TwoPantsBlock, LeafSpec, DeformedBlockState)>,
    scans: Vec<(BlockFamily, MeasuredLamination, PathScanReport)>,
}

fn grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn scan(family: &BlockFamily, lam: &MeasuredLamination, t_grid: &[f64]) -> PathScanReport {
    path_scan(family, lam, t_grid, PrecisionPolicy::Double, DEFAULT_DIP_THRESHOLD).unwrap()
}

fn ac1(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..10_000 {
        let l = rng.gen_range(0.01..2.0);
        let tw = rng.gen_range(0.0..l);
        let w = rng.gen_range(0..=40);
        let t = rng.gen_range(0.0..5.0);
        let weight = rng.gen_range(0.01..1.0);
        let b = TwoPantsBlock::with_default_boundaries(l, tw).unwrap();
        let leaf = LeafSpec::Transversal { w, weight };
        let m = t * weight;
        let axis = b.dual_axis(w).unwrap();
        let ln_e = ln_trace_formula_excess(l, m, axis.ln_neg_k1, axis.ln_k2).unwrap();
        if ln_e.exp() > 1e-10 {
            let tr_matrix = deformed_cuff_holonomy(&b, leaf, t).unwrap().trace().abs();
            let tr_formula = 2.0 + ln_e.exp();
            worst = worst.max((tr_matrix - tr_formula).abs() / tr_formula);
            compared += 1;
        }
        if ledger.states.len() < 2000 {
            let s = deform(&b, leaf, t, PrecisionPolicy::Double).unwrap();
            ledger.states.push((b, leaf, s));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && secs <= 10.0,
        format!("max relative trace gap {worst:.2e} over {compared} states, {secs:.2} s"),
    )
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let l0: f64 = 2.0;
    let mut violations = 0;
    let mut checked = 0;
    let mut min_decay = f64::INFINITY;
    for _ in 0..1000 {
        let l = (rng.gen_range((1e-3f64).ln()..l0.ln())).exp();
        let tw = rng.gen_range(0.0..l);
        let bd = [0; 4].map(|_| rng.gen_range(0.1..l0));
        let b = TwoPantsBlock::build(l, tw, bd).unwrap();
        for _ in 0..8 {
            let j = rng.gen_range(-300i64..=300);
            let Ok(h) = b.dual_holonomy(j) else { continue };
            let Ok(g) = axis_endpoints(&h) else {
                violations += 1;
                continue;
            };
            checked += 1;
            let prod = -g.k1 * g.k2;
            let ok = g.k1 < 0.0
                && g.k2 > 0.0
                && prod >= 1.0 - 1e-10
                && prod <= (2.0 * l0).exp() * (1.0 + 1e-10);
            if !ok {
                violations += 1;
            }
            let axis = b.dual_axis(j).unwrap();
            if axis.is_obtuse(AngleConvention::default()) {
                let w = b.winding(j, AngleConvention::default()).unwrap();
                let decay = (axis.ln_neg_k1 + l * (w + 2) as f64).exp();
                min_decay = min_decay.min(decay);
            }
        }
    }
    outcome(
        violations == 0 && min_decay > 0.0 && min_decay.is_finite(),
        format!("{checked} dual axes, {violations} outside [1, e^(2 L0)]; min -k1 e^(l(w+2)) = {min_decay:.4e}"),
    )
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_gap = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(0.05..=1.0f64);
        let count = rng.gen_range(2..=20usize);
        let mut heights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..d).exp()).collect();
        heights.sort_by(f64::total_cmp);
        heights.dedup();
        let mut prev: Option<(f64, f64)> = None;
        let mut product = Isometry::identity();
        let mut total = 0.0;
        for y in heights {
            let k2 = match prev {
                None => y * rng.gen_range(0.2..5.0),
                Some((yp, k2p)) => {
                    let hi = k2p * (y / yp).powi(2);
                    rng.gen_range(k2p..hi).clamp(k2p * (1.0 + 1e-9), hi * (1.0 - 1e-9))
                }
            };
            let k1 = -y * y / k2;
            let tau = rng.gen_range(0.01..1.0);
            let g = Geodesic::new(k1, k2).unwrap();
            product = product.compose(&translation_along(&g, tau).unwrap());
            total += tau;
            prev = Some((y, k2));
        }
        let m = translation_length(&product).unwrap().value;
        worst_gap = worst_gap.min(m - total);
        max_ratio = max_ratio.max(m / total);
    }
    outcome(
        worst_gap >= -1e-10 && max_ratio < 10.0,
        format!("min tau(product) - sum = {worst_gap:.3e}, max tau(product)/sum = {max_ratio:.4}"),
    )
}

fn ac4(ledger: &Ledger) -> Outcome {
    let mut rows = 0;
    let mut worst = f64::NEG_INFINITY;
    for (_, lam, rep) in &ledger.scans {
        for r in &rep.rows {
            let mu = match lam.leaf(r.n) {
                LeafSpec::Transversal { weight, .. } => weight,
                _ => 0.0,
            };
            worst = worst.max(r.lt - (r.l0 + r.t * mu));
            rows += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{rows} scan rows, max l_t - (l_0 + t mu) = {worst:.3e}"),
    )
}

fn ratios(rep: &PathScanReport, t: f64) -> Vec<f64> {
    rep.rows_at(t).map(|r| r.lt / r.l0).collect()
}

fn summary(rep: &PathScanReport, t: f64) -> (f64, f64) {
    let r = ratios(rep, t);
    (
        r.iter().copied().fold(f64::INFINITY, f64::min),
        r.iter().copied().fold(0.0, f64::max),
    )
}

fn ac5(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let t_grid = grid(0.5, 4.0);
    let (fam, lam) = default_counterexample(200).unwrap();
    let rep = scan(&fam, &lam, &t_grid);
    let (small, small_lam) = (fam.truncated(100), MeasuredLamination::new(lam.leaves()[..100].to_vec()).unwrap());
    let rep_small = scan(&small, &small_lam, &t_grid);

    let (inf2, _) = summary(&rep, 2.0);
    // Envelope fitted on k in [10, 200] with the geometric winding number.
    let mut c_fit = 0.0f64;
    for r in rep.rows_at(2.0).filter(|r| r.n >= 10) {
        let b = fam.block(r.n).unwrap();
        let w = b.winding((r.n * r.n) as i64, AngleConvention::default()).unwrap();
        c_fit = c_fit.max(r.lt / r.l0 * (w as f64 * b.l_alpha).exp());
    }
    let mut envelope_ok = c_fit.is_finite() && c_fit > 0.0;
    for r in rep.rows_at(2.0).filter(|r| r.n >= 10) {
        let b = fam.block(r.n).unwrap();
        let w = b.winding((r.n * r.n) as i64, AngleConvention::default()).unwrap();
        // The envelope is attained up to a bounded factor, not merely an upper bound.
        let e = c_fit * (-(w as f64) * b.l_alpha).exp();
        envelope_ok &= r.lt / r.l0 <= e && r.lt / r.l0 >= e / 10.0;
    }
    let part_a = inf2 < 1e-3 && envelope_ok;

    let mut part_b = true;
    let mut b_detail = String::new();
    for t in [1.0, 3.0] {
        let (inf, sup) = summary(&rep, t);
        let (inf_s, sup_s) = summary(&rep_small, t);
        let stable = ((inf - inf_s) / inf_s).abs() <= 0.1 && ((sup - sup_s) / sup_s).abs() <= 0.1;
        part_b &= inf > 0.05 && sup < 20.0 && stable;
        b_detail += &format!(" t={t}: inf {inf:.4} (N=100 {inf_s:.4}), sup {sup:.4} (N=100 {sup_s:.4});");
    }
    let dips: Vec<f64> = rep.summaries.iter().filter(|s| s.dip_flag).map(|s| s.t).collect();
    let part_c = dips == vec![2.0];
    let secs = start.elapsed().as_secs_f64();
    let pass = part_a && part_b && part_c && secs <= 30.0 && rep.error_count() == 0;
    ledger.scans.push((fam, lam, rep));
    ledger.scans.push((small, small_lam, rep_small));
    outcome(
        pass,
        format!("(a) inf ratio at t=2 {inf2:.3e}, fitted C {c_fit:.4}; (b){b_detail} (c) dips at {dips:?}; {secs:.2} s"),
    )
}

fn ac6(ledger: &mut Ledger) -> Outcome {
    let t_grid = grid(0.5, 5.0);
    let fam = BlockFamily::from_fn(200, 1.0, |n| 1.0 / n as f64, |_| 0.0, |_| [1.0; 4]).unwrap();
    let leaves = (1..=200)
        .map(|n| LeafSpec::Transversal {
            w: (n * n) as i64,
            weight: (1.0 / n as f64) * (3.0 + (-1f64).powi(n as i32)) / 8.0,
        })
        .collect();
    let lam = MeasuredLamination::new(leaves).unwrap();
    let rep = scan(&fam, &lam, &t_grid);
    let dips: Vec<f64> = rep.summaries.iter().filter(|s| s.dip_flag).map(|s| s.t).collect();
    let pass = dips == vec![2.0, 4.0];
    ledger.scans.push((fam, lam, rep));
    outcome(pass, format!("dips flagged at {dips:?}"))
}

fn ac7() -> Outcome {
    let fam = BlockFamily::from_fn(100, 1.0, |_| 0.5, |_| 0.0, |_| [1.0; 4]).unwrap();
    let leaves = (1..=100)
        .map(|n| LeafSpec::Transversal {
            w: 0,
            weight: n as f64 * 0.5,
        })
        .collect();
    let heavy = MeasuredLamination::new(leaves).unwrap();
    let v_heavy = necessity_report(&fam, &heavy, 20, 10.0).unwrap();
    let (f8, l8) = default_counterexample(100).unwrap();
    let v8 = necessity_report(&f8, &l8, 20, 10.0).unwrap();
    outcome(
        v_heavy.verdict == Necessity::Unbounded && v8.verdict == Necessity::Bounded,
        format!(
            "omega_n = n l_n: {:?} (tail/head {:.2}); default family: {:?} (tail/head {:.3})",
            v_heavy.verdict,
            v_heavy.tail_max / v_heavy.head,
            v8.verdict,
            v8.tail_max / v8.head
        ),
    )
}

fn ac8(ledger: &mut Ledger) -> Outcome {
    // Scan rows carry no twist bound inputs, so redeform every scanned block.
    let mut states = std::mem::take(&mut ledger.states);
    for (fam, lam, rep) in &ledger.scans {
        for r in rep.rows.iter().filter(|r| r.t > 0.0) {
            let b = fam.block(r.n).unwrap().clone();
            let leaf = lam.leaf(r.n);
            let s = deform(&b, leaf, r.t, PrecisionPolicy::Double).unwrap();
            states.push((b, leaf, s));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for (_, _, s) in &states {
        let bound = s.l_deformed.value.ln().abs().max(1.0) + s.dual_length;
        worst = worst.max(s.twist_deformed.abs() - bound);
    }
    let n = states.len();
    ledger.states = states;
    outcome(
        worst <= 1e-8,
        format!("{n} deformed states, max |t'| - bound = {worst:.3e}"),
    )
}

fn theorem81_sup(n: usize, w: impl Fn(usize) -> i64 + Sync, ledger: &mut Ledger) -> f64 {
    let fam = BlockFamily::from_fn(n, 1.0, |k| 1.0 / k as f64, |_| 0.0, |_| [1.0; 4]).unwrap();
    let leaves = (1..=n)
        .map(|k| LeafSpec::Transversal {
            w: w(k),
            weight: 0.5 / k as f64,
        })
        .collect();
    let lam = MeasuredLamination::new(leaves).unwrap();
    let t_grid = grid(1.0, 10.0);
    let rep = scan(&fam, &lam, &t_grid);
    let sup = t_grid.iter().map(|&t| rep.fn_sup_norm(t)).fold(0.0, f64::max);
    let errors = rep.error_count();
    ledger.scans.push((fam, lam, rep));
    if errors > 0 {
        f64::NAN
    } else {
        sup
    }
}

fn ac9(ledger: &mut Ledger) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    let families: [(&str, fn(usize) -> i64); 2] = [
        ("clause-3 (w_n = -2n)", |k| -2 * k as i64),
        ("small winding (w_n = 8n)", |k| 8 * k as i64),
    ];
    for (name, w) in families {
        let s100 = theorem81_sup(100, w, ledger);
        let s1000 = theorem81_sup(1000, w, ledger);
        let ok = s100.is_finite() && s1000.is_finite() && ((s1000 - s100) / s100).abs() <= 0.1;
        pass &= ok;
        detail += &format!(" {name}: N=100 {s100:.4}, N=1000 {s1000:.4};");
    }
    outcome(pass, format!("sup_t sup_n |FN displacement|:{detail}"))
}

fn main() {
    let mut ledger = Ledger::default();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("AC1 trace-formula route agreement", single.install(|| ac1(&mut ledger))));
    results.push(("AC2 dual axis height range and decay", ac2()));
    results.push(("AC3 super-additivity of nested translations", ac3()));
    results.push(("AC5 counterexample dip at t = 2", ac5(&mut ledger)));
    results.push(("AC6 multi-dip family", ac6(&mut ledger)));
    results.push(("AC7 necessity verdicts", ac7()));
    results.push(("AC9 Fenchel-Nielsen stability", ac9(&mut ledger)));
    results.push(("AC4 deformed length upper bound", ac4(&ledger)));
    results.push(("AC8 twist bound", ac8(&mut ledger)));
    results.sort_by_key(|(name, _)| name[2..4].trim().parse::<u32>().unwrap_or(0));
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
