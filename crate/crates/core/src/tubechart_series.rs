// Taylor coefficients c_ij of K(u, v) = e^u sin v - v (e^{2u} - 1)/(2u) = sum c_ij u^i v^j, total degree <= 13.
const K_SERIES: [(i32, i32, f64); 47] = [
    (0, 3, -1.0 / 6.0),
    (2, 1, -1.0 / 6.0),
    (1, 3, -1.0 / 6.0),
    (3, 1, -1.0 / 6.0),
    (0, 5, 1.0 / 120.0),
    (2, 3, -1.0 / 12.0),
    (4, 1, -11.0 / 120.0),
    (1, 5, 1.0 / 120.0),
    (3, 3, -1.0 / 36.0),
    (5, 1, -13.0 / 360.0),
    (0, 7, -1.0 / 5040.0),
    (2, 5, 1.0 / 240.0),
    (4, 3, -1.0 / 144.0),
    (6, 1, -19.0 / 1680.0),
    (1, 7, -1.0 / 5040.0),
    (3, 5, 1.0 / 720.0),
    (5, 3, -1.0 / 720.0),
    (7, 1, -1.0 / 336.0),
    (0, 9, 1.0 / 362880.0),
    (2, 7, -1.0 / 10080.0),
    (4, 5, 1.0 / 2880.0),
    (6, 3, -1.0 / 4320.0),
    (8, 1, -247.0 / 362880.0),
    (1, 9, 1.0 / 362880.0),
    (3, 7, -1.0 / 30240.0),
    (5, 5, 1.0 / 14400.0),
    (7, 3, -1.0 / 30240.0),
    (9, 1, -251.0 / 1814400.0),
    (0, 11, -1.0 / 39916800.0),
    (2, 9, 1.0 / 725760.0),
    (4, 7, -1.0 / 120960.0),
    (6, 5, 1.0 / 86400.0),
    (8, 3, -1.0 / 241920.0),
    (10, 1, -1013.0 / 39916800.0),
    (1, 11, -1.0 / 39916800.0),
    (3, 9, 1.0 / 2177280.0),
    (5, 7, -1.0 / 604800.0),
    (7, 5, 1.0 / 604800.0),
    (9, 3, -1.0 / 2177280.0),
    (11, 1, -509.0 / 119750400.0),
    (0, 13, 1.0 / 6227020800.0),
    (2, 11, -1.0 / 79833600.0),
    (4, 9, 1.0 / 8709120.0),
    (6, 7, -1.0 / 3628800.0),
    (8, 5, 1.0 / 4838400.0),
    (10, 3, -1.0 / 21772800.0),
    (12, 1, -1361.0 / 2075673600.0),
];
