//! Golden CLI cases shared by the golden-file and acceptance targets.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const HALF_PI: &str = "1.5707963267948966";

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const CASES: &[Case] = &[
    Case {
        name: "check_orthonormal_to_arbitrary",
        args: &["check", "orthonormal.json", "arbitrary.json"],
        code: 0,
    },
    Case {
        name: "check_cos_half",
        args: &["check", "zero_plus.json", "cos_half.json"],
        code: 1,
    },
    Case {
        name: "check_dependent_initial",
        args: &["check", "dependent.json", "dependent.json"],
        code: 3,
    },
    Case {
        name: "check_malformed",
        args: &["check", "malformed.json", "zero_plus.json"],
        code: 2,
    },
    Case {
        name: "check_dimension_mismatch",
        args: &["check", "zero_plus.json", "orthonormal3.json"],
        code: 2,
    },
    Case {
        name: "synth_identity",
        args: &["synth", "zero_plus.json", "zero_plus.json"],
        code: 0,
    },
    Case {
        name: "synth_orthonormal",
        args: &["synth", "orthonormal.json", "arbitrary.json"],
        code: 0,
    },
    Case {
        name: "synth_cos_point_nine",
        args: &["synth", "zero_plus.json", "cos_point_nine.json"],
        code: 0,
    },
    Case {
        name: "synth_infeasible",
        args: &["synth", "zero_plus.json", "cos_half.json"],
        code: 1,
    },
    Case {
        name: "apply_identity",
        args: &["apply", "identity_kraus.json", "plus_state.json"],
        code: 0,
    },
    Case {
        name: "apply_measurement_plus",
        args: &["apply", "measurement.json", "plus_state.json"],
        code: 0,
    },
    Case {
        name: "apply_synthesized",
        args: &[
            "apply",
            "kraus_cos_point_nine.json",
            "zero_plus.json",
            "--index",
            "1",
        ],
        code: 0,
    },
    Case {
        name: "apply_mismatch",
        args: &["apply", "identity_kraus.json", "qutrit_state.json"],
        code: 2,
    },
    Case {
        name: "coherence_identity",
        args: &[
            "coherence",
            "zero_plus.json",
            "zero_plus.json",
            "--coeffs",
            "1,1",
        ],
        code: 0,
    },
    Case {
        name: "coherence_rotated",
        args: &[
            "coherence",
            "zero_plus.json",
            "rotated.json",
            "--coeffs",
            "[1, [0, 1]]",
        ],
        code: 0,
    },
    Case {
        name: "coherence_non_unitary",
        args: &[
            "coherence",
            "zero_plus.json",
            "cos_point_nine.json",
            "--coeffs",
            "1,1",
        ],
        code: 1,
    },
    Case {
        name: "coherence_single_coefficient",
        args: &[
            "coherence",
            "zero_plus.json",
            "zero_plus.json",
            "--coeffs",
            "1,0",
        ],
        code: 2,
    },
    Case {
        name: "coherence_dependent_final",
        args: &[
            "coherence",
            "orthonormal3.json",
            "dependent_final3.json",
            "--coeffs",
            "1,1,1",
        ],
        code: 2,
    },
    Case {
        name: "sweep_cos_family",
        args: &[
            "sweep",
            "cos_family.json",
            "--start",
            "0",
            "--stop",
            HALF_PI,
            "--steps",
            "50",
        ],
        code: 0,
    },
    Case {
        name: "sweep_two_points",
        args: &[
            "sweep",
            "cos_family.json",
            "--start",
            "0",
            "--stop",
            "0.5",
            "--steps",
            "2",
        ],
        code: 0,
    },
    Case {
        name: "sweep_identity_family",
        args: &[
            "sweep",
            "identity_family.json",
            "--start",
            "0.1",
            "--stop",
            HALF_PI,
            "--steps",
            "8",
        ],
        code: 0,
    },
    Case {
        name: "sweep_bad_template",
        args: &[
            "sweep",
            "bad_template.json",
            "--start",
            "0",
            "--stop",
            "1",
            "--steps",
            "3",
        ],
        code: 2,
    },
    Case {
        name: "sweep_single_step",
        args: &[
            "sweep",
            "cos_family.json",
            "--start",
            "0",
            "--stop",
            "1",
            "--steps",
            "1",
        ],
        code: 2,
    },
    Case {
        name: "gen_independent",
        args: &[
            "gen",
            "--dim",
            "2",
            "--count",
            "2",
            "--mode",
            "independent",
            "--seed",
            "1",
        ],
        code: 0,
    },
    Case {
        name: "gen_unitary_image",
        args: &[
            "gen",
            "--dim",
            "2",
            "--count",
            "2",
            "--mode",
            "unitary-image",
            "--base",
            "zero_plus.json",
            "--seed",
            "7",
        ],
        code: 0,
    },
    Case {
        name: "gen_oversized_independent",
        args: &["gen", "--dim", "2", "--count", "3", "--mode", "independent"],
        code: 2,
    },
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.out"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detmap"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}
