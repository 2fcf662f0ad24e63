//! PML node lists worked out by hand from the grid recurrence, frozen.

pub const GRID_A: [f64; 42] = [
    0.0, 0.1, 0.2, 0.30000000000000004, 0.4, 0.5, 0.6, 0.7, 0.7999999999999999, 0.8999999999999999, 0.9999999999999999,
    1.0999999999999999, 1.2000542659484015, 1.30920931020087, 1.4282929252053802, 1.5582081981060345, 1.6999403594299263,
    1.8545642547197658, 2.0232524957744302, 2.207284353313505, 2.4080554585045735, 2.6270883869261343, 2.8660442052311024,
    3.126735068076619, 3.411137960850739, 3.721409692415874, 4.059903251568544, 4.429185651256926, 4.832057395880295,
    5.271573719303339, 5.751067754646776, 6.2741758115656, 6.844864952708703, 7.4674630784898035, 8.146691748321702,
    8.887701987218275, 9.696113349308526, 10.57805653450631, 11.540219881525148, 12.589900089824376, 13.735057555143552,
    14.984376738269859,
];
pub const GRID_B: [f64; 15] = [
    0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5342450737170503, 1.8831263569800296, 2.311341869106677, 2.836931901082303,
    3.4820390349650157, 4.273840988708438, 5.245695586220743, 6.438546089102759, 7.9026460952848705,
];
pub const GRID_C: [f64; 14] = [
    0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0116411326906904, 5.581454853972717, 6.216055272539062,
    6.922808508207912,
];
