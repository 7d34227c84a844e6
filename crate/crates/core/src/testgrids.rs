//! Tiny grids shared across unit tests.

/// Three buses in a triangle: slack generator at bus 1, loads at 2 and 3.
pub const TRIANGLE: &str = "\
function mpc = triangle3
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t50\t10\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t3\t1\t30\t5\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t80\t0\t60\t-60\t1\t100\t1\t120\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0.02\t100\t0\t0\t0\t0\t1\t-360\t360;
\t2\t3\t0.01\t0.1\t0.02\t100\t0\t0\t0\t0\t1\t-360\t360;
\t1\t3\t0.02\t0.2\t0.04\t100\t0\t0\t0\t0\t1\t-360\t360;
];
";

/// Two buses: slack at 1, a 100 MW + 20 MVAr load at 2, one line.
pub const TWO_BUS: &str = "\
function mpc = twobus
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t100\t20\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t100\t0\t80\t-80\t1\t100\t1\t200\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0\t150\t0\t0\t0\t0\t1\t-360\t360;
];
";

/// Path a-b-c-d used by the betweenness examples; unit impedances so all
/// edges weigh the same once metrics are flat.
pub const PATH4: &str = "\
function mpc = path4
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t3\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t4\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t30\t0\t60\t-60\t1\t100\t1\t120\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
\t2\t3\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
\t3\t4\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
];
";
