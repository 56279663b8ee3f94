/// (name, sample, W, p) computed by `tests/oracles/shapiro_reference.py`.
pub const SHAPIRO_REFERENCE: &[(&str, &[f64], f64, f64)] = &[
    ("n3", &[1.0, 2.0, 4.0], 0.9642857142857142, 0.6368868450289689),
    ("n5", &[2.1, 3.4, 1.9, 5.6, 4.0], 0.9314289773150016, 0.606147203485118),
    ("n8", &[10.0, 10.0, 11.0, 12.0, 12.0, 15.0, 20.0, 31.0], 0.752467115463763, 0.008697554115671987),
    (
        "n12",
        &[89.62, 83.53, 69.89, 75.22, 81.41, 74.55, 62.02, 83.13, 71.44, 66.74, 69.05, 75.73],
        0.9769376200250895,
        0.9684266048970893,
    ),
    (
        "n20u",
        &[
            0.0998, 0.7188, 0.8852, 0.8944, 0.1829, 0.0761, 0.6975, 0.7961, 0.3005, 0.1407, 0.5371,
            0.8659, 0.741, 0.1072, 0.5372, 0.3614, 0.0968, 0.5459, 0.9431, 0.2533,
        ],
        0.8932062714303255,
        0.030814600638459144,
    ),
    (
        "n30",
        &[
            1.064, 8.898, 0.013, 2.437, 1.185, 0.299, 3.138, 5.195, 1.335, 3.039, 1.811, 2.477, 0.75,
            0.643, 1.075, 3.664, 1.576, 1.286, 0.223, 1.214, 0.532, 0.78, 0.629, 0.039, 1.561, 0.824,
            0.776, 3.699, 1.974, 0.21,
        ],
        0.7639291250829687,
        1.541798022163849e-05,
    ),
];

