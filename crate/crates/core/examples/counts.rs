use bsft::circuits::{build_exrec, EcMethod, ExRecOptions};
fn main() {
    for n in [2usize, 3, 4, 5, 7] {
        let code = bsft::build_code(n).unwrap();
        for m in EcMethod::ALL {
            let t = std::time::Instant::now();
            let e = build_exrec(&code, m, &ExRecOptions::default()).unwrap();
            println!(
                "n={n} {m}: {} locations, {:?} layers={} sections={:?} ({:?})",
                e.circuit().num_locations(),
                e.circuit().op_counts(),
                e.circuit().num_layers(),
                e.section_counts(),
                t.elapsed()
            );
        }
    }
}
