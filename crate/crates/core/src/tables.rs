//! Reference values for the V1, V2 and V3 tables, to three decimals.

/// Agreement required between a computed value and a three-decimal reference.
pub const TABLE_TOLERANCE: f64 = 1e-3;

/// Whether `computed` agrees with the rounded `reference` within [`TABLE_TOLERANCE`].
pub fn matches(computed: f64, reference: f64) -> bool {
    (computed - reference).abs() <= TABLE_TOLERANCE + 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V1Row {
    pub n: usize,
    pub r: f64,
    /// `(√2/2)·sin(π/n)`
    pub o_term: f64,
    pub shell_term: f64,
    pub dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2Row {
    pub n: usize,
    pub r: f64,
    /// `r·sin(2π/n)`
    pub r_sin: f64,
    /// `sin(π/n)`
    pub sin: f64,
    pub dp: f64,
    /// Diversity product of O(n) for comparison.
    pub o_dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V3Row {
    pub n: usize,
    pub size: usize,
    pub dp: f64,
}

const fn v1(n: usize, r: f64, o_term: f64, shell_term: f64, dp: f64) -> V1Row {
    V1Row {
        n,
        r,
        o_term,
        shell_term,
        dp,
    }
}

const fn v2(n: usize, r: f64, r_sin: f64, sin: f64, dp: f64, o_dp: f64) -> V2Row {
    V2Row {
        n,
        r,
        r_sin,
        sin,
        dp,
        o_dp,
    }
}

const fn v3(n: usize, size: usize, dp: f64) -> V3Row {
    V3Row { n, size, dp }
}

pub const V1_TABLE: [V1Row; 5] = [
    v1(4, 0.259, 0.5, 0.259, 0.259),
    v1(6, 0.284, 0.353, 0.246, 0.246),
    v1(8, 0.321, 0.271, 0.227, 0.227),
    v1(10, 0.360, 0.219, 0.209, 0.209),
    v1(12, 0.386, 0.183, 0.193, 0.183),
];

pub const V2_TABLE: [V2Row; 6] = [
    v2(4, 0.383, 0.383, 0.707, 0.383, 0.5),
    v2(6, 0.410, 0.355, 0.500, 0.355, 0.354),
    v2(8, 0.447, 0.316, 0.355, 0.316, 0.271),
    v2(10, 0.479, 0.282, 0.309, 0.282, 0.219),
    v2(12, 0.505, 0.253, 0.259, 0.253, 0.183),
    v2(14, 0.527, 0.229, 0.222, 0.222, 0.157),
];

pub const V3_TABLE: [V3Row; 11] = [
    v3(3, 124, 0.259),
    v3(4, 293, 0.195),
    v3(5, 582, 0.156),
    v3(6, 974, 0.131),
    v3(7, 1640, 0.112),
    v3(8, 2438, 0.098),
    v3(9, 3510, 0.087),
    v3(10, 4898, 0.078),
    v3(11, 6516, 0.071),
    v3(12, 8433, 0.065),
    v3(13, 10770, 0.060),
];

pub fn v1_row(n: usize) -> Option<&'static V1Row> {
    V1_TABLE.iter().find(|r| r.n == n)
}

pub fn v2_row(n: usize) -> Option<&'static V2Row> {
    V2_TABLE.iter().find(|r| r.n == n)
}

pub fn v3_row(n: usize) -> Option<&'static V3Row> {
    V3_TABLE.iter().find(|r| r.n == n)
}
