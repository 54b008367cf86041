//! Searches departure minutes for the KTVK timetable so that the best
//! round-trip plan has agent finishes 128 and 144 with 43 and 48 minutes of
//! waiting, is strictly better than every plan with other finish times, and
//! the calendar has 719 windows. Prints the departures it finds.
//!
//! cargo run --release -p rpptu --example ktvk_timetable -- [seed]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpptu::fixtures::{ktvk, round_trip_plans, RoundTrip, Timetable};
use rpptu_core::Instance;

const TARGET_WINDOWS: i64 = 719;

/// Zero exactly when the timetable meets every target.
fn score(tt: &Timetable) -> i64 {
    let Ok(inst) = Instance::from_raw(&ktvk(tt, 2)) else { return i64::MAX };
    let plans = round_trip_plans(&inst);
    let sorted = |p: &rpptu::fixtures::TripPlan| {
        let mut f = p.timing;
        f.sort();
        f
    };
    let intended = plans
        .iter()
        .find(|p| p.trips[0] == [RoundTrip::Triangle] && p.trips[1] == [RoundTrip::Thane, RoundTrip::Vashi])
        .expect("intended plan is enumerated");
    // Fuel is fixed per tour, so matching finishes also matches waiting.
    let mut s = 4 * ((intended.timing[0].0 - 128).abs() + (intended.timing[1].0 - 144).abs());
    let f = sorted(intended);
    let bar = intended.cost;
    for p in &plans {
        if sorted(p) != f {
            s += 3 * (bar + 1 - p.cost).max(0);
        }
    }
    s + (inst.calendar.window_count() as i64 - TARGET_WINDOWS).abs()
}

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tt = Timetable::bundled();
    let mut cur = score(&tt);
    for step in 0..400_000u64 {
        let mut next = tt.clone();
        let r = rng.gen_range(0..next.runs.len());
        let deps = &mut next.runs[r].departures;
        match rng.gen_range(0..10) {
            0 if deps.len() < 6 => deps.push(rng.gen_range(0..tt.period)),
            1 if deps.len() > 2 => {
                deps.remove(rng.gen_range(0..deps.len()));
            }
            _ => {
                let i = rng.gen_range(0..deps.len());
                deps[i] = (deps[i] + rng.gen_range(-4..=4)).rem_euclid(tt.period);
            }
        }
        deps.sort_unstable();
        deps.dedup();
        let s = score(&next);
        if s <= cur || rng.gen_bool(0.002) {
            tt = next;
            cur = s;
        }
        if step % 20_000 == 0 {
            eprintln!("step {step}: score {cur}");
        }
        if cur == 0 {
            println!("found at step {step}");
            for run in &tt.runs {
                println!("  {:?} fast={} {:?}", run.service, run.fast, run.departures);
            }
            return;
        }
    }
    println!("no timetable found; last score {cur}");
}
