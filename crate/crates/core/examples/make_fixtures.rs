//! Synthesizes the benchmark grids under `fixtures/` and verifies their
//! design goals against the real pipeline.
//!
//! Both grids are laid out so that interesting behaviour is *structural*,
//! not accidental:
//!
//! case200 (200 buses / 245 branches / 49 generators)
//!   * a 495 MW plant at bus 189 hangs on the double bridge
//!     189-187-121, so its corridor tops the impact ranking and any cut
//!     strands the largest unit (reserve collapse);
//!   * "pocket A" behind bus 133 (18 buses, ~210 MW plus through-flow to
//!     the southern ring) is fed by [136,133] and [135,133] plus a long
//!     resistive backdoor — cutting both feeds keeps the pocket connected
//!     but drags its voltages down, overloads the remaining paths, and
//!     burns enough extra losses to eat the reserve margin;
//!   * "pocket B" behind bus 123 is fed by [125,123]/[126,123]/[127,123]
//!     with ratings snug enough that losing the dominant feed overloads
//!     the other two;
//!   * the rest is meshed rings with region-balanced generation so trunk
//!     flows stay modest and the base case is clean with a reserve margin
//!     just above the largest unit.
//!
//! case500 (500 buses / 597 branches / 90 generators)
//!   * "pocket C" behind hub 141 fed by [142,141] and [87,141];
//!   * "pocket D" behind bus 423 fed mainly by [424,423];
//!   * five capacitor-bank taps ([268,267], [213,212], [105,104],
//!     [408,407], [36,35]) that swing high when their load tap is cut.
//!
//! Run with `cargo run -p gridscreen-core --example make_fixtures` after
//! touching the layout; it refuses to write fixtures that fail their
//! design checks.

use gridscreen_core::{
    parse_case, rank_branches, run_screening, serialize_case, solve_ac, validate_outage, Branch,
    Bus, BusKind, Gen, NetworkCase, ScreeningConfig, ValidationMethod,
};

// ---------------------------------------------------------------------
// Small construction kit
// ---------------------------------------------------------------------

struct NetBuilder {
    name: String,
    buses: Vec<Bus>,
    gens: Vec<Gen>,
    branches: Vec<Branch>,
    used: std::collections::HashSet<i64>,
}

impl NetBuilder {
    fn new(name: &str) -> NetBuilder {
        NetBuilder {
            name: name.to_string(),
            buses: Vec::new(),
            gens: Vec::new(),
            branches: Vec::new(),
            used: std::collections::HashSet::new(),
        }
    }

    fn bus(&mut self, id: i64, pd: f64, qd: f64) {
        assert!(self.used.insert(id), "bus {id} declared twice");
        self.buses.push(Bus {
            id,
            kind: BusKind::Pq,
            pd,
            qd,
            gs: 0.0,
            bs: 0.0,
            area: 1.0,
            vm: 1.0,
            va: 0.0,
            base_kv: 138.0,
            zone: 1.0,
            v_max: 1.05,
            v_min: 0.95,
            extra: Vec::new(),
        });
    }

    fn bus_mut(&mut self, id: i64) -> &mut Bus {
        self.buses.iter_mut().find(|b| b.id == id).expect("bus exists")
    }

    fn gen(&mut self, bus: i64, pg: f64, p_max: f64, q_range: f64) {
        if self.bus_mut(bus).kind == BusKind::Pq {
            self.bus_mut(bus).kind = BusKind::Pv;
        }
        self.gens.push(Gen {
            bus,
            pg,
            qg: 0.0,
            q_max: q_range,
            q_min: -q_range,
            vg: 1.02,
            m_base: 100.0,
            status: true,
            p_max,
            p_min: 0.0,
            extra: Vec::new(),
        });
    }

    fn line(&mut self, from: i64, to: i64, r: f64, x: f64, b: f64, rate: f64) {
        self.branches.push(Branch {
            from,
            to,
            r,
            x,
            b,
            rate_a: rate,
            rate_b: 0.0,
            rate_c: 0.0,
            tap: 0.0,
            shift: 0.0,
            status: true,
            ang_min: -360.0,
            ang_max: 360.0,
            extra: Vec::new(),
        });
    }

    /// Standard trunk line: impedance scaled by a length factor.
    fn trunk(&mut self, from: i64, to: i64, len: f64, rate: f64) {
        self.line(from, to, 0.008 * len, 0.05 * len, 0.02 * len, rate);
    }

    /// Closes a ring over `ids` (consecutive links plus the wrap link).
    fn ring(&mut self, ids: &[i64], len: f64, rate: f64) {
        for w in ids.windows(2) {
            self.trunk(w[0], w[1], len, rate);
        }
        self.trunk(*ids.last().unwrap(), ids[0], len, rate);
    }

    /// Sets the slack unit's capability so the solved reserve margin of
    /// the whole case lands on `margin_target`.
    fn pin_margin(&mut self, slack_bus: i64, margin_target: f64) {
        let case = NetworkCase::new(
            self.name.clone(),
            100.0,
            self.buses.clone(),
            self.gens.clone(),
            self.branches.clone(),
        )
        .expect("case well-formed");
        let sol = solve_ac(&case);
        assert!(sol.converged, "must converge before pinning the margin");
        let mut fixed_headroom = 0.0;
        let mut duty = 0.0;
        for (g, gen) in case.gens.iter().enumerate() {
            if gen.bus == slack_bus {
                duty = sol.gen_p[g];
            } else {
                fixed_headroom += gen.p_max - sol.gen_p[g];
            }
        }
        let slack_pmax = duty + (margin_target - fixed_headroom);
        let slack_gen = self.gens.iter_mut().find(|g| g.bus == slack_bus).unwrap();
        assert!(slack_pmax > slack_gen.pg, "slack capability must cover its schedule");
        slack_gen.p_max = slack_pmax;
    }

    fn finish(self) -> NetworkCase {
        NetworkCase::new(self.name.clone(), 100.0, self.buses, self.gens, self.branches)
            .expect("generated case is well-formed")
    }
}

// ---------------------------------------------------------------------
// case200
// ---------------------------------------------------------------------

fn build_case200() -> NetworkCase {
    let mut nb = NetBuilder::new("case200");

    // ----- backbone ring: buses 101..=120, meshed with chords ---------
    let backbone: Vec<i64> = (101..=120).collect();
    for &id in &backbone {
        let pd = if id % 2 == 0 { 24.0 } else { 8.0 };
        nb.bus(id, pd, pd * 0.30);
    }
    nb.ring(&backbone, 1.0, 450.0);
    for (a, b) in [(101, 110), (103, 112), (105, 114), (107, 116), (109, 118), (111, 120)] {
        nb.trunk(a, b, 1.6, 400.0);
    }
    // Second circuit on the slack exit, the one trunk span that would
    // otherwise dominate the impact ranking.
    nb.trunk(101, 102, 1.0, 450.0);

    // Backbone generation: the slack plus four mid-size plants with real
    // spinning headroom. Everything else on the system runs at its limit,
    // so the reserve margin is the slack + these four + the big plant.
    nb.gen(101, 130.0, 400.0, 200.0); // p_max re-pinned after layout
    nb.bus_mut(101).kind = BusKind::Slack;
    nb.gen(105, 30.0, 50.0, 120.0);
    nb.gen(109, 30.0, 50.0, 120.0);
    nb.gen(113, 30.0, 50.0, 120.0);
    nb.gen(117, 30.0, 50.0, 120.0);

    // ----- big plant corridor: 189 -- 187 -- 121 -- four backbone ties -
    nb.bus(187, 0.0, 0.0);
    nb.bus(189, 0.0, 0.0);
    nb.bus(121, 0.0, 0.0);
    nb.gen(189, 280.0, 495.0, 250.0); // the largest unit on the system
    nb.line(189, 187, 0.003, 0.03, 0.04, 520.0);
    nb.line(187, 121, 0.003, 0.03, 0.04, 520.0);
    nb.trunk(121, 103, 1.0, 320.0);
    nb.trunk(121, 107, 1.0, 320.0);
    nb.trunk(121, 111, 1.0, 320.0);
    nb.trunk(121, 115, 1.0, 320.0);

    // ----- hub 149: radial star knotting three regions together -------
    nb.bus(149, 30.0, 9.0);
    nb.trunk(149, 104, 1.2, 260.0);
    nb.trunk(149, 108, 1.2, 260.0);
    nb.trunk(149, 115, 1.2, 260.0);

    // ----- western ring: hosts pocket feeders on both sides -----------
    // 135/136 feed pocket A; 125/126/127 feed pocket B; 150 anchors the
    // A backdoor. The ring reaches the rest of the system only through
    // long buffered ties into the quiet southern ring (98/99/100), which
    // keeps the pocket neighbourhood well away from the heavy corridors
    // and carries next to no through-flow.
    let west: Vec<i64> = vec![122, 124, 125, 126, 127, 148, 150, 155, 156, 157];
    for &id in &west {
        nb.bus(id, 14.0, 4.0);
    }
    nb.ring(&west, 1.0, 300.0);
    nb.bus(98, 0.0, 0.0);
    nb.bus(99, 0.0, 0.0);
    nb.bus(100, 0.0, 0.0);
    nb.trunk(122, 98, 2.0, 200.0);
    nb.trunk(98, 184, 2.0, 200.0);
    nb.trunk(156, 99, 2.0, 200.0);
    nb.trunk(99, 185, 2.0, 200.0);
    nb.trunk(126, 100, 2.0, 200.0);
    nb.trunk(100, 186, 2.0, 200.0);
    // Local generation sits right next to its sinks (incl. both pockets),
    // so ring and tie flows stay small and out of the impact ranking.
    nb.gen(124, 100.0, 100.0, 90.0);
    nb.gen(148, 120.0, 120.0, 90.0);
    nb.gen(155, 70.0, 70.0, 70.0);
    nb.gen(157, 60.0, 60.0, 60.0);
    nb.gen(150, 45.0, 45.0, 50.0);
    nb.gen(122, 40.0, 40.0, 50.0);

    // Pocket-A trunk feeders live on the west ring too, with their own
    // units so the ring edges behind them stay lightly loaded.
    nb.bus(135, 12.0, 3.0);
    nb.bus(136, 12.0, 3.0);
    nb.trunk(135, 124, 0.8, 220.0);
    nb.trunk(135, 125, 0.8, 220.0);
    nb.trunk(136, 127, 0.8, 220.0);
    nb.trunk(136, 148, 0.8, 220.0);
    nb.gen(135, 60.0, 60.0, 60.0);
    nb.gen(136, 60.0, 60.0, 60.0);

    // ----- pocket A: 18 buses behind head 133 --------------------------
    // Two strong feeds, one long resistive backdoor (150-147), one modest
    // transit tie onward to the southern ring (145-191). No generation
    // inside, so nothing props the pocket up when the feeds go.
    let pocket_a: Vec<i64> =
        vec![128, 129, 130, 131, 132, 133, 134, 137, 138, 139, 140, 141, 142, 143, 144, 145, 146, 147];
    for &id in &pocket_a {
        let pd = if id == 133 { 4.0 } else { 10.0 };
        nb.bus(id, pd, pd * 0.35);
    }
    // Head feeds (the designed x=3 pair).
    nb.line(136, 133, 0.006, 0.045, 0.01, 190.0);
    nb.line(135, 133, 0.006, 0.048, 0.01, 190.0);
    // Collector layout: every interior bus on its own spoke from 133, a
    // couple of short ties for meshing. No single interior line controls
    // many paths, so the search keeps its attention on the feeds.
    for &id in &pocket_a {
        if id != 133 && id != 145 {
            nb.trunk(133, id, 0.8, 120.0);
        }
    }
    nb.trunk(141, 145, 0.8, 120.0);
    nb.trunk(146, 147, 0.7, 120.0);
    nb.trunk(144, 145, 0.7, 120.0);
    // Backdoor: long and lossy, rated low enough that carrying the whole
    // pocket shows up as a thermal problem in DC as well.
    nb.line(150, 147, 0.060, 0.240, 0.02, 110.0);
    // Transit tie to the southern ring (south imports through the pocket).
    nb.line(145, 191, 0.030, 0.200, 0.02, 90.0);

    // ----- pocket B: 6 buses behind head 123 ---------------------------
    nb.bus(123, 20.0, 7.0);
    for id in [151, 152, 153, 154, 158] {
        nb.bus(id, 24.0, 8.0);
        nb.trunk(123, id, 0.7, 80.0);
    }
    nb.trunk(151, 152, 0.7, 80.0);
    nb.trunk(153, 154, 0.7, 80.0);
    nb.trunk(158, 151, 0.7, 80.0);
    // Three feeds; 125 is the stiff one the other two cannot replace.
    nb.line(125, 123, 0.004, 0.025, 0.01, 115.0);
    nb.line(126, 123, 0.012, 0.120, 0.01, 62.0);
    nb.line(127, 123, 0.012, 0.124, 0.01, 62.0);

    // ----- northern ring ------------------------------------------------
    let north: Vec<i64> = vec![159, 160, 161, 162, 163, 164, 165, 166, 167, 168, 169, 170];
    for &id in &north {
        nb.bus(id, 16.0, 5.0);
    }
    nb.ring(&north, 1.1, 280.0);
    nb.trunk(159, 112, 0.9, 280.0);
    nb.trunk(166, 117, 0.9, 280.0);
    nb.gen(160, 80.0, 80.0, 70.0);
    nb.gen(165, 80.0, 80.0, 70.0);

    // ----- eastern ring -------------------------------------------------
    let east: Vec<i64> = vec![171, 172, 173, 174, 175, 176, 177, 178, 179, 180, 181, 182, 183];
    for &id in &east {
        nb.bus(id, 16.0, 5.0);
    }
    nb.ring(&east, 1.1, 280.0);
    nb.trunk(171, 113, 0.9, 280.0);
    nb.trunk(178, 118, 0.9, 280.0);
    nb.gen(173, 80.0, 80.0, 70.0);
    nb.gen(178, 80.0, 80.0, 70.0);

    // ----- southern ring -------------------------------------------------
    // Light on generation; part of its import arrives through pocket A.
    let south: Vec<i64> = vec![184, 185, 186, 188, 190, 191, 192, 193, 194];
    for &id in &south {
        nb.bus(id, 15.0, 5.0);
    }
    nb.ring(&south, 1.1, 280.0);
    nb.trunk(184, 109, 0.9, 280.0);
    nb.trunk(191, 105, 2.6, 90.0);
    nb.gen(186, 60.0, 60.0, 70.0);

    // ----- outer villages: buses 1..=97 as looped chains -----------------
    // Ten loops tied to the backbone at both ends so nothing out here is a
    // bridge (the last loop is short: 98-100 serve as tie buffers above).
    for loop_idx in 0..10 {
        let hi = if loop_idx == 9 { 97 } else { 10 + 10 * loop_idx };
        let ids: Vec<i64> = (1 + 10 * loop_idx..=hi).collect();
        for &id in &ids {
            let pd = if id % 3 == 0 { 9.0 } else { 4.0 };
            nb.bus(id, pd, pd * 0.3);
        }
        for w in ids.windows(2) {
            nb.trunk(w[0], w[1], 1.3, 150.0);
        }
        let anchor_a = 101 + (2 * loop_idx as i64) % 20;
        let anchor_b = 101 + (2 * loop_idx as i64 + 9) % 20;
        nb.trunk(anchor_a, ids[0], 1.3, 150.0);
        nb.trunk(*ids.last().unwrap(), anchor_b, 1.3, 150.0);
    }
    // Village generation keeps trunk flows modest.
    for bus in [5, 25, 45, 65, 85] {
        nb.gen(bus, 50.0, 50.0, 50.0);
    }

    // ----- remaining buses: 195..=200 micro ring ------------------------
    let tail: Vec<i64> = vec![195, 196, 197, 198, 199, 200];
    for &id in &tail {
        nb.bus(id, 10.0, 3.0);
    }
    nb.ring(&tail, 1.0, 150.0);
    nb.trunk(195, 172, 0.9, 150.0);
    nb.trunk(198, 181, 0.9, 150.0);

    // ----- fill generator roster to 49 units ----------------------------
    // Peakers running flat out: they add no reserve, only local supply.
    let mut extra_sites = vec![
        3, 9, 17, 23, 29, 33, 39, 47, 53, 59, 63, 69, 77, 83, 89, 93, 95, 71, 57, 161, 163, 168,
        175, 177, 181, 185, 190, 192, 196, 199, 51,
    ];
    extra_sites.truncate(49 - nb.gens.len());
    for bus in extra_sites {
        nb.gen(bus, 12.0, 12.0, 18.0);
    }
    assert_eq!(nb.gens.len(), 49, "generator roster");

    // Reserve design: margin sits a hair above the 495 MW requirement set
    // by the big plant, so stranding the plant (or burning ~15 MW of extra
    // losses) flips the reserve check.
    nb.pin_margin(101, 502.0);

    nb.finish()
}

// ---------------------------------------------------------------------
// case500
// ---------------------------------------------------------------------

/// The five capacitor-bank sites: (ring bus with the bank, load tap).
const CAP_SITES: [(i64, i64); 5] = [(267, 268), (212, 213), (104, 105), (407, 408), (35, 36)];

fn build_case500() -> NetworkCase {
    let mut nb = NetBuilder::new("case500");

    // ----- backbone ring: buses 301..=330 ------------------------------
    let backbone: Vec<i64> = (301..=330).collect();
    for &id in &backbone {
        let pd = if id % 2 == 0 { 26.0 } else { 10.0 };
        nb.bus(id, pd, pd * 0.30);
    }
    nb.ring(&backbone, 1.0, 500.0);
    for k in 0..10 {
        let a = 301 + 3 * k;
        let b = 301 + (3 * k + 15) % 30;
        nb.trunk(a, b, 1.6, 420.0);
    }

    // Backbone generation: slack, one 420 MW flagship (sets the reserve
    // requirement), and five mid-size units with spinning headroom.
    nb.gen(301, 220.0, 600.0, 260.0); // p_max re-pinned after layout
    nb.bus_mut(301).kind = BusKind::Slack;
    nb.gen(316, 390.0, 420.0, 220.0);
    for bus in [305, 310, 315, 320, 325] {
        nb.gen(bus, 110.0, 172.0, 130.0);
    }

    // ----- coastal ring: the quiet region anchoring the pocket cluster --
    let coast: Vec<i64> = (451..=462).collect();
    for &id in &coast {
        nb.bus(id, 13.0, 4.0);
    }
    nb.ring(&coast, 1.1, 280.0);
    nb.trunk(451, 311, 2.5, 300.0);
    nb.trunk(457, 318, 2.5, 300.0);
    nb.gen(453, 70.0, 110.0, 80.0);
    nb.gen(460, 70.0, 110.0, 80.0);

    // ----- pocket ring: hosts the C and D feeders -----------------------
    let wring: Vec<i64> = (81..=90).collect();
    for &id in &wring {
        nb.bus(id, 13.0, 4.0);
    }
    nb.ring(&wring, 1.0, 300.0);
    nb.trunk(82, 452, 2.0, 200.0);
    nb.trunk(86, 455, 2.0, 200.0);
    nb.trunk(90, 459, 2.0, 200.0);
    nb.gen(83, 80.0, 80.0, 90.0);
    nb.gen(85, 60.0, 60.0, 75.0);
    nb.gen(89, 55.0, 55.0, 70.0);
    nb.gen(90, 45.0, 45.0, 65.0);

    // C feeder spur (the second feeder, 87, is a ring bus).
    nb.bus(142, 12.0, 4.0);
    nb.trunk(142, 85, 0.8, 220.0);
    nb.trunk(142, 88, 0.8, 220.0);
    nb.gen(142, 70.0, 70.0, 85.0);
    nb.gen(87, 25.0, 25.0, 50.0);
    nb.gen(86, 40.0, 40.0, 45.0);

    // ----- pocket C: collector star behind head 141 ---------------------
    let pocket_c: Vec<i64> = (129..=140).collect();
    nb.bus(141, 6.0, 2.0);
    for &id in &pocket_c {
        nb.bus(id, 15.0, 5.0);
        nb.trunk(141, id, 0.8, 120.0);
    }
    // Pair up the spokes so no interior bus hangs on a single line (a
    // bridge outage would otherwise dominate the ranking with its own
    // load).
    for (a, b) in [(129, 130), (131, 132), (133, 134), (135, 136), (137, 138), (139, 140)] {
        nb.trunk(a, b, 0.7, 120.0);
    }
    // The designed feed pair: one stiff circuit carries the bulk of the
    // pocket, the second is a weaker parallel support that still attracts
    // the 87-side destinations. A reactive condenser keeps the pocket
    // solvable when both feeds are out.
    nb.line(142, 141, 0.0045, 0.032, 0.01, 210.0);
    nb.line(87, 141, 0.007, 0.048, 0.01, 140.0);
    nb.gen(137, 0.0, 0.0, 60.0);
    // Two resistive backdoors, snugly rated: together they keep the
    // two-feed outage solvable, but each is too lossy to attract any
    // shortest paths.
    nb.line(89, 138, 0.060, 0.340, 0.02, 110.0);
    nb.line(84, 130, 0.055, 0.340, 0.02, 100.0);

    // ----- pocket D: small star behind 423, mainly fed from 424 ---------
    nb.bus(423, 10.0, 3.0);
    for id in [419, 420, 421, 422] {
        nb.bus(id, 26.0, 9.0);
        nb.trunk(423, id, 0.7, 80.0);
    }
    nb.trunk(419, 420, 0.7, 80.0);
    nb.trunk(421, 422, 0.7, 80.0);
    // The feeder bus leans on two short legs so that losing the pocket
    // feed spreads its supply swing instead of collapsing one leg.
    nb.bus(424, 11.0, 4.0);
    nb.trunk(424, 142, 0.8, 220.0);
    nb.trunk(424, 90, 0.8, 220.0);
    nb.gen(424, 55.0, 55.0, 70.0);
    nb.line(424, 423, 0.004, 0.030, 0.01, 135.0);
    // Snug alternate exits used when the main feed goes; lossy enough to
    // carry next to nothing in the base case.
    nb.line(81, 419, 0.036, 0.300, 0.01, 45.0);
    nb.line(90, 421, 0.040, 0.300, 0.01, 45.0);

    // ----- capacitor-bank load taps -------------------------------------
    // The ring buses themselves are ordinary loop members (declared by the
    // loop fill below); each carries a shunt bank sized so losing its load
    // tap swings the bus above the voltage band.
    for &(_, tap) in &CAP_SITES {
        nb.bus(tap, 42.0, 17.0);
    }

    // ----- distribution loops: every remaining bus, chained and anchored -
    let special: std::collections::HashSet<i64> = backbone
        .iter()
        .chain(coast.iter())
        .chain(wring.iter())
        .chain(pocket_c.iter())
        .chain([141, 142, 423, 424, 419, 420, 421, 422].iter())
        .chain(CAP_SITES.iter().map(|(_, t)| t))
        .cloned()
        .collect();
    let remaining: Vec<i64> = (1..=500).filter(|id| !special.contains(id)).collect();
    let loops: Vec<&[i64]> = remaining.chunks(15).collect();
    for (li, ids) in loops.iter().enumerate() {
        for &id in ids.iter() {
            let pd = if id % 3 == 0 { 11.0 } else { 5.0 };
            nb.bus(id, pd, pd * 0.3);
        }
        for w in ids.windows(2) {
            nb.trunk(w[0], w[1], 1.2, 160.0);
        }
        let anchor_a = 301 + (2 * li as i64) % 30;
        let anchor_b = 301 + (2 * li as i64 + 13) % 30;
        nb.trunk(anchor_a, ids[0], 1.2, 160.0);
        nb.trunk(*ids.last().unwrap(), anchor_b, 1.2, 160.0);
    }

    // Attach the capacitor banks and their taps now that the ring buses
    // exist: direct tap line plus a long alternate into the far side of
    // the backbone, so the tap stays served if the direct line goes but
    // its load genuinely leaves the bank's neighbourhood.
    for &(ring_bus, tap) in &CAP_SITES {
        nb.bus_mut(ring_bus).bs = 28.0;
        nb.line(tap, ring_bus, 0.010, 0.050, 0.01, 80.0);
        let far = 301 + (ring_bus * 7) % 30;
        nb.line(tap, far, 0.050, 0.250, 0.02, 80.0);
    }

    // ----- loop generation + cross-ties to the final edge count ---------
    let mut site_iter = remaining.iter().copied().filter(|id| id % 5 == 2);
    while nb.gens.len() < 90 {
        let bus = site_iter.next().expect("enough generator sites");
        if CAP_SITES.iter().any(|&(r, _)| r == bus) {
            continue;
        }
        nb.gen(bus, 34.0, 34.0, 30.0);
    }

    let mut cross = 0usize;
    while nb.branches.len() < 597 {
        let wave = cross / loops.len();
        let i = cross % loops.len();
        let j = (i + 14 - wave) % loops.len();
        let a = loops[i][loops[i].len() / 2];
        let b = loops[j][loops[j].len() / 2];
        nb.trunk(a, b, 2.6, 160.0);
        cross += 1;
    }

    nb.pin_margin(301, 460.0);
    nb.finish()
}

fn verify_case500(case: &NetworkCase) -> bool {
    println!(
        "case500: {} buses / {} branches / {} gens",
        case.buses.len(),
        case.branches.len(),
        case.gens.len()
    );
    let mut ok = true;

    ok &= check(
        "shape",
        case.buses.len() == 500 && case.branches.len() == 597 && case.gens.len() == 90,
        &format!("{}/{}/{}", case.buses.len(), case.branches.len(), case.gens.len()),
    );
    ok &= check("single island", case.islands().len() == 1, "");

    let sol = solve_ac(case);
    ok &= check(
        "base AC converges",
        sol.converged,
        &format!("{} iters, mismatch {:.2e}", sol.iterations, sol.max_mismatch),
    );
    let vmin = sol.v_mag.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = sol.v_mag.iter().cloned().fold(0.0f64, f64::max);
    println!("  base voltage band: [{vmin:.4}, {vmax:.4}]");
    let base = validate_outage(case, &[], ValidationMethod::Ac, None);
    ok &= check(
        "base clean",
        !base.is_violating(),
        &format!(
            "ov={} uv={} o={} res={} margin={:.1} req={:.1}",
            base.overvoltage,
            base.undervoltage,
            base.overflow,
            base.reserve_limit,
            base.reserve_margin_mw,
            base.reserve_req_mw
        ),
    );

    let cfg = ScreeningConfig { x: 3, d: 2, sl: 3, a_percent: 5.0, max_candidates: usize::MAX };
    let out = match run_screening(case, &cfg) {
        Ok(o) => o,
        Err(e) => {
            println!("  [FAIL] screening failed: {e}");
            return false;
        }
    };
    let k142 = branch_index(case, 142, 141);
    let k87 = branch_index(case, 87, 141);
    let k424 = branch_index(case, 424, 423);
    let full_rank = rank_branches(&out.metrics, 100.0);
    let pos = |k: usize| full_rank.iter().position(|&b| b == k).unwrap();
    println!(
        "  seeds 24..34 by M: {:?}",
        full_rank[24..34]
            .iter()
            .map(|&k| ((case.branches[k].from, case.branches[k].to), out.metrics.m[k].abs().round()))
            .collect::<Vec<_>>()
    );
    let probes = [
        (424, 90),
        (424, 142),
        (424, 423),
        (142, 85),
        (142, 88),
        (88, 89),
        (89, 90),
        (90, 81),
        (81, 82),
        (83, 84),
        (84, 85),
        (85, 86),
        (86, 87),
        (87, 141),
        (142, 141),
        (89, 138),
        (84, 130),
        (81, 419),
    ];
    println!(
        "  probe M: {:?}",
        probes
            .iter()
            .map(|&(f, t)| ((f, t), (out.metrics.m[branch_index(case, f, t)].abs() * 10.0).round() / 10.0))
            .collect::<Vec<_>>()
    );
    println!(
        "  rank positions ({} seeds): [142,141]={} [87,141]={} [424,423]={}  (M = {:.1} / {:.1} / {:.1})",
        out.seeds.len(),
        pos(k142),
        pos(k87),
        pos(k424),
        out.metrics.m[k142].abs(),
        out.metrics.m[k87].abs(),
        out.metrics.m[k424].abs(),
    );
    ok &= check(
        "a pocket-C feed is a seed",
        out.seeds.contains(&k142) || out.seeds.contains(&k87),
        "",
    );
    ok &= check("the D feed is a seed", out.seeds.contains(&k424), "");
    let target: Vec<usize> = {
        let mut t = vec![k142, k87, k424];
        t.sort_unstable();
        t
    };
    let emitted = out.candidates.iter().find(|c| c.sorted_branches() == target);
    ok &= check("x=3 candidate {[142,141],[424,423],[87,141]} emitted", emitted.is_some(), "");
    for cand in &out.candidates {
        if cand.seed != k142 && cand.seed != k87 && cand.seed != k424 {
            continue;
        }
        println!(
            "    pocket seed {:?}: {:?} (scores {:?})",
            (case.branches[cand.seed].from, case.branches[cand.seed].to),
            cand.branches
                .iter()
                .map(|&k| (case.branches[k].from, case.branches[k].to))
                .collect::<Vec<_>>(),
            cand.gbc_trace
        );
    }

    let row = validate_outage(case, &[k142, k87, k424], ValidationMethod::Ac, None);
    println!(
        "  pocket row counts: o={} uv={} ov={} unsolved={} shed={:.1}",
        row.overflow, row.undervoltage, row.overvoltage, row.unsolved, row.islanded_load_mw
    );
    describe_outage(case, &[k142, k87, k424], &[(89, 138), (84, 130), (81, 419), (90, 421)]);
    ok &= check("pocket row: solves", !row.unsolved, "");
    ok &= check("pocket row: overflow ≥ 1", row.overflow >= 1, &format!("{}", row.overflow));

    // The capacitor-bank pentagon: cutting all five taps swings their ring
    // buses over the band.
    let pentagon: Vec<usize> =
        CAP_SITES.iter().map(|&(r, t)| branch_index(case, t, r)).collect();
    let rowp = validate_outage(case, &pentagon, ValidationMethod::Ac, None);
    println!(
        "  pentagon row counts: o={} uv={} ov={} unsolved={} shed={:.1}",
        rowp.overflow, rowp.undervoltage, rowp.overvoltage, rowp.unsolved, rowp.islanded_load_mw
    );
    if !rowp.unsolved {
        let mut sub = case.clone();
        for &k in &pentagon {
            sub.branches[k].status = false;
        }
        let psol = solve_ac(&sub);
        if psol.converged {
            let index = sub.bus_index();
            for &(ring_bus, _) in &CAP_SITES {
                println!("    V[{}] = {:.4}", ring_bus, psol.v_mag[index[&ring_bus]]);
            }
        }
    }
    ok &= check("pentagon row: solves", !rowp.unsolved, "");
    ok &= check("pentagon row: overvoltage ≥ 1", rowp.overvoltage >= 1, &format!("{}", rowp.overvoltage));

    ok
}

// ---------------------------------------------------------------------
// Verification harness
// ---------------------------------------------------------------------

fn branch_index(case: &NetworkCase, from: i64, to: i64) -> usize {
    case.branches
        .iter()
        .position(|b| (b.from, b.to) == (from, to) || (b.from, b.to) == (to, from))
        .unwrap_or_else(|| panic!("branch [{from},{to}] missing"))
}

fn check(label: &str, ok: bool, details: &str) -> bool {
    println!(
        "  [{}] {label}{}",
        if ok { "ok" } else { "FAIL" },
        if details.is_empty() { String::new() } else { format!(" — {details}") }
    );
    ok
}

/// Prints the post-outage state of a handful of named branches/buses.
fn describe_outage(case: &NetworkCase, outage: &[usize], watch: &[(i64, i64)]) {
    let mut sub = case.clone();
    for &k in outage {
        sub.branches[k].status = false;
    }
    let sol = solve_ac(&sub);
    if !sol.converged {
        println!("    (post-outage AC did not converge)");
        return;
    }
    let vmin = sol
        .v_mag
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (sub.buses[i].id, *v))
        .unwrap();
    println!("    min V = {:.4} at bus {}", vmin.1, vmin.0);
    for &(f, t) in watch {
        let k = branch_index(case, f, t);
        if outage.contains(&k) {
            continue;
        }
        let mva = sol.flow_from_mva[k].max(sol.flow_to_mva[k]);
        println!("    [{f},{t}] {:.1} MVA / rate {:.0}", mva, case.branches[k].rate_a);
    }
}

fn verify_case200(case: &NetworkCase) -> bool {
    println!(
        "case200: {} buses / {} branches / {} gens",
        case.buses.len(),
        case.branches.len(),
        case.gens.len()
    );
    let mut ok = true;

    ok &= check(
        "shape",
        case.buses.len() == 200 && case.branches.len() == 245 && case.gens.len() == 49,
        &format!("{}/{}/{}", case.buses.len(), case.branches.len(), case.gens.len()),
    );
    ok &= check("single island", case.islands().len() == 1, "");

    let sol = solve_ac(case);
    ok &= check(
        "base AC converges",
        sol.converged,
        &format!("{} iters, mismatch {:.2e}", sol.iterations, sol.max_mismatch),
    );
    let vmin = sol.v_mag.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = sol.v_mag.iter().cloned().fold(0.0f64, f64::max);
    println!("  base voltage band: [{vmin:.4}, {vmax:.4}]");
    let base = validate_outage(case, &[], ValidationMethod::Ac, None);
    ok &= check(
        "base clean",
        !base.is_violating(),
        &format!(
            "ov={} uv={} o={} res={} margin={:.1} req={:.1}",
            base.overvoltage,
            base.undervoltage,
            base.overflow,
            base.reserve_limit,
            base.reserve_margin_mw,
            base.reserve_req_mw
        ),
    );
    let headroom = base.reserve_margin_mw - base.reserve_req_mw;
    ok &= check("reserve margin tight", headroom > 5.0 && headroom < 60.0, &format!("headroom {headroom:.1} MW"));

    // Impact ranking: the corridor must lead, a pocket-A feed must make
    // the default 5% seed cut (13 seeds).
    let cfg = ScreeningConfig { x: 3, d: 4, sl: 4, a_percent: 5.0, max_candidates: usize::MAX };
    let out = match run_screening(case, &cfg) {
        Ok(o) => o,
        Err(e) => {
            println!("  [FAIL] screening failed: {e}");
            return false;
        }
    };
    let k189 = branch_index(case, 189, 187);
    let k136 = branch_index(case, 136, 133);
    let k135 = branch_index(case, 135, 133);
    let k125 = branch_index(case, 125, 123);
    let full_rank = rank_branches(&out.metrics, 100.0);
    let pos = |k: usize| full_rank.iter().position(|&b| b == k).unwrap();
    println!(
        "  seed list ({}): {:?}",
        out.seeds.len(),
        out.seeds
            .iter()
            .map(|&k| ((case.branches[k].from, case.branches[k].to), out.metrics.m[k].abs().round()))
            .collect::<Vec<_>>()
    );
    println!(
        "  rank positions: [189,187]={} [136,133]={} [135,133]={} [125,123]={}  (M = {:.1} / {:.1} / {:.1} / {:.1})",
        pos(k189),
        pos(k136),
        pos(k135),
        pos(k125),
        out.metrics.m[k189].abs(),
        out.metrics.m[k136].abs(),
        out.metrics.m[k135].abs(),
        out.metrics.m[k125].abs(),
    );
    ok &= check("corridor is a seed", out.seeds.contains(&k189), "");
    ok &= check("a pocket-A feed is a seed", out.seeds.contains(&k136) || out.seeds.contains(&k135), "");

    // The designed x=3 candidate must be emitted.
    let target: Vec<usize> = {
        let mut t = vec![k136, k135, k125];
        t.sort_unstable();
        t
    };
    let emitted = out.candidates.iter().find(|c| c.sorted_branches() == target);
    ok &= check("x=3 candidate {[136,133],[135,133],[125,123]} emitted", emitted.is_some(), "");
    for cand in &out.candidates {
        println!(
            "    candidate seed {:?}: {:?} (scores {:?})",
            (case.branches[cand.seed].from, case.branches[cand.seed].to),
            cand.branches
                .iter()
                .map(|&k| (case.branches[k].from, case.branches[k].to))
                .collect::<Vec<_>>(),
            cand.gbc_trace
        );
    }

    // Validation shape of the designed rows.
    let watch = [(150, 147), (145, 191), (126, 123), (127, 123), (136, 133), (135, 133)];
    let row3 = validate_outage(case, &[k136, k135, k125], ValidationMethod::Ac, None);
    println!(
        "  x=3 row counts: o={} uv={} ov={} unsolved={} shed={:.1} margin={:.1}",
        row3.overflow, row3.undervoltage, row3.overvoltage, row3.unsolved, row3.islanded_load_mw, row3.reserve_margin_mw
    );
    describe_outage(case, &[k136, k135, k125], &watch);
    ok &= check("x=3 row: overflow ≥ 1", row3.overflow >= 1, &format!("{}", row3.overflow));
    ok &= check("x=3 row: undervoltage ≥ 1", row3.undervoltage >= 1, &format!("{}", row3.undervoltage));
    ok &= check(
        "x=3 row: reserve_limit",
        row3.reserve_limit,
        &format!("margin {:.1} vs req {:.1}", row3.reserve_margin_mw, row3.reserve_req_mw),
    );

    let row1 = validate_outage(case, &[k189], ValidationMethod::Ac, None);
    ok &= check("x=1 row [189,187]: violating", row1.is_violating(), "");
    ok &= check(
        "x=1 row [189,187]: reserve_limit or unsolved",
        row1.reserve_limit || row1.unsolved,
        &format!("margin {:.1}, unsolved {}", row1.reserve_margin_mw, row1.unsolved),
    );

    let rowu = validate_outage(case, &[k189, k136, k135], ValidationMethod::Ac, None);
    ok &= check(
        "{[189,187],[136,133],[135,133]}: unsolved or islanded or reserve",
        rowu.unsolved || rowu.islanded_load_mw > 0.0 || rowu.reserve_limit,
        &format!("unsolved={} shed={:.1}", rowu.unsolved, rowu.islanded_load_mw),
    );

    // Pocket B on its own: one feed out must overload the siblings in DC
    // as well (keeps the brute-force prescreen honest).
    let rowb = validate_outage(case, &[k125], ValidationMethod::Dc, None);
    ok &= check("[125,123] out: DC overflow on sibling feeds", rowb.overflow >= 1, &format!("{}", rowb.overflow));

    ok
}

// ---------------------------------------------------------------------
// main
// ---------------------------------------------------------------------

fn write_fixture(case: &NetworkCase, path: &str) {
    // Store the solved operating point so the file is warm-startable.
    let mut solved = case.clone();
    let sol = solve_ac(case);
    assert!(sol.converged, "fixture must solve before freezing");
    for (i, bus) in solved.buses.iter_mut().enumerate() {
        bus.vm = sol.v_mag[i];
        bus.va = sol.v_ang[i].to_degrees();
    }
    for (g, gen) in solved.gens.iter_mut().enumerate() {
        gen.pg = sol.gen_p[g];
        gen.qg = sol.gen_q[g];
    }
    let text = serialize_case(&solved);
    let reparsed = parse_case(&text).expect("fixture round-trips");
    assert_eq!(solved, reparsed, "serialization must be lossless");
    std::fs::write(path, text).expect("write fixture");
    println!("wrote {path}");
}

fn main() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    std::fs::create_dir_all(format!("{root}/fixtures")).unwrap();

    let case200 = build_case200();
    let ok200 = verify_case200(&case200);

    if ok200 {
        write_fixture(&case200, &format!("{root}/fixtures/case200.m"));
    } else {
        println!("case200 design checks failed; fixture not written");
        std::process::exit(1);
    }

    let case500 = build_case500();
    let ok500 = verify_case500(&case500);

    if ok500 {
        write_fixture(&case500, &format!("{root}/fixtures/case500.m"));
    } else {
        println!("case500 design checks failed; fixture not written");
        std::process::exit(1);
    }
}
