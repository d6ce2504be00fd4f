#!/usr/bin/env python3
"""Generate the shipped scenario library (run from anywhere; writes ../scenarios)."""
import json
import os

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")
os.makedirs(OUT, exist_ok=True)

DA, DB, DC, DD = 0.6, 0.4, 0.2, 0.1


def guide(gl, gr=1.0, order=None, n=None):
    wg = {"gamma_L": gl, "gamma_R": gr}
    if order is not None:
        wg["order"] = order
    return wg


def net(n, omega, detuning, gl, gr=1.0, waveguides=None, onsite=None):
    d = {
        "n_spins": n,
        "drive": {"rabi": omega, "detuning": detuning},
        "waveguides": waveguides if waveguides is not None else [guide(gl, gr)],
    }
    if onsite is not None:
        d["onsite_decay"] = onsite
    return d


def write(name, doc):
    doc = {"version": 1, "name": name, **doc}
    with open(os.path.join(OUT, name + ".json"), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


# --- multimer formation, N = 8, single chiral guide -------------------------
write("fig2a", {
    "comment": "N=8 dimerization on resonance, gamma_L = 0.1 gamma_R",
    "task": "evolve",
    "network": net(8, 0.5, 0.0, 0.1),
    "evolve": {"t_max": 200.0, "samples": 101,
               "probes": [[1, 2], [3, 4], [5, 6], [7, 8]]},
})
write("fig2b", {
    "comment": "N=8 tetramerization, delta_a=0, delta_b=0.3; arrangement of the "
               "two four-spin blocks assumed",
    "task": "evolve",
    "network": net(8, 0.5, [0.0, 0.3, -0.3, 0.0, 0.0, 0.3, -0.3, 0.0], 0.1),
    "evolve": {"t_max": 200.0, "samples": 101,
               "probes": [[1, 2, 3, 4], [5, 6, 7, 8]]},
})
write("fig2c", {
    "comment": "N=8 octamer from two chiral guides on resonance; second-guide "
               "coupling order assumed",
    "task": "steady",
    "network": {
        "n_spins": 8,
        "drive": {"rabi": 0.5, "detuning": 0.0},
        "waveguides": [
            guide(0.1, 1.0),
            guide(0.5, 1.0, [2, 1, 4, 3, 6, 5, 8, 7]),
        ],
    },
    "steady": {"t_max": 1000.0, "probes": [[1, 2], [1, 2, 3, 4]]},
})
write("fig2d", {
    "comment": "N=8 non-local dimers in a bidirectional channel; nesting and "
               "magnitudes of the detuning pattern assumed (large detunings "
               "keep the bidirectional relaxation gap ~0.1)",
    "task": "evolve",
    "network": net(8, 0.5, [2.8, 1.6, -1.6, -2.8, 2.2, 1.0, -1.0, -2.2], 1.0),
    "evolve": {"t_max": 200.0, "samples": 81,
               "probes": [[1, 4], [2, 3], [5, 8], [6, 7]]},
})

# --- two driven spins --------------------------------------------------------
write("fig4a", {
    "comment": "two-spin dimer dark state, opposite detunings; delta = 0.3 and "
               "gamma_L = 0.5 assumed",
    "task": "darkstate",
    "network": net(2, 0.5, [0.3, -0.3], 0.5),
    "darkstate": {"construction": "dimerized", "steady_t_max": 200.0},
})
write("fig4b", {
    "comment": "two-spin relaxation into the dimer; same network as fig4a",
    "task": "evolve",
    "network": net(2, 0.5, [0.3, -0.3], 0.5),
    "evolve": {"t_max": 100.0, "samples": 101, "probes": [[1, 2]]},
})
write("fig5", {
    "comment": "two-spin steady state with broken dark-state conditions: "
               "homogeneous detuning offset 0.1 and on-site decay 0.05 assumed",
    "task": "steady",
    "network": net(2, 0.5, [0.4, -0.2], 0.5, onsite=0.05),
    "steady": {"t_max": 500.0, "probes": [[1, 2]]},
})

# --- two-waveguide tetramer network ------------------------------------------
write("fig6c", {
    "comment": "two-guide network whose guides swap spins 2 and 3; detunings and "
               "asymmetries assumed (real-reduction regime)",
    "task": "darkstate",
    "network": {
        "n_spins": 4,
        "drive": {"rabi": 0.5, "detuning": [0.3, 0.6, -0.6, -0.3]},
        "waveguides": [guide(0.4, 1.0), guide(0.6, 1.0, [1, 3, 2, 4])],
    },
    "darkstate": {"construction": "two_guide", "steady_t_max": 1000.0},
})

# --- purification dynamics grid, N = 8 ---------------------------------------
rows = [("cascaded", 0.0, "abcd"), ("chiral", 0.5, "efgh"), ("bidirectional", 1.0, "ijkl")]
cols = [
    ("dimerized", [DA, -DA, DB, -DB, DC, -DC, DD, -DD],
     [[1, 2], [3, 4], [5, 6], [7, 8]],
     [[1, 2], [3, 4], [5, 6], [7, 8]]),
    ("tetramer + two dimers", [DA, DB, -DB, -DA, DC, -DC, DD, -DD],
     [[1, 2, 3, 4], [5, 6], [7, 8]],
     [[1, 4], [2, 3], [5, 6], [7, 8]]),
    ("two tetramers", [DA, DB, -DB, -DA, DC, DD, -DD, -DC],
     [[1, 2, 3, 4], [5, 6, 7, 8]],
     [[1, 4], [2, 3], [5, 8], [6, 7]]),
    ("octamer", [DA, DB, DC, DD, -DD, -DC, -DB, -DA],
     [[1, 2], [1, 2, 3, 4]],
     [[1, 8], [2, 7], [3, 6], [4, 5]]),
]
for row_name, gl, letters in rows:
    for (col_name, pattern, probes, bidi_probes), letter in zip(cols, letters):
        bidi = row_name == "bidirectional"
        write("fig7" + letter, {
            "comment": f"{row_name} setup, {col_name} detuning pattern; "
                       "arrangement of the pattern assumed",
            "task": "evolve",
            "network": net(8, 0.5, pattern, gl),
            "evolve": {"t_max": 1000.0 if bidi else 200.0, "samples": 101,
                       "probes": bidi_probes if bidi else probes},
        })

# --- odd N ---------------------------------------------------------------
for letter, gl in (("a", 0.0), ("b", 0.5)):
    write("fig8" + letter, {
        "comment": "N=7 chain, staggered pairs with an unpaired last spin",
        "task": "evolve",
        "network": net(7, 0.5, [DA, -DA, DB, -DB, DC, -DC, DD], gl),
        "evolve": {"t_max": 200.0, "samples": 101,
                   "probes": [[1, 2], [3, 4], [5, 6], [7]]},
    })

# --- error susceptibility sweep -----------------------------------------
write("fig9", {
    "comment": "steady-state purity vs a homogeneous detuning offset, N=4 "
               "fully entangled pattern, gamma_L = 0.3 gamma_R",
    "task": "sweep",
    "network": net(4, 0.5, [0.0, 0.3, -0.3, 0.0], 0.3),
    "steady": {"t_max": 3000.0},
    "sweep": {
        "subtask": "steady",
        "axes": [{
            "name": "Delta",
            "values": {"start": -0.05, "stop": 0.05, "count": 21},
            "targets": [{"path": "network.drive.detuning"}],
        }],
    },
})

# --- single-trajectory dimer formation ------------------------------------
for letter, gl in (("a", 0.0), ("b", 0.05)):
    write("fig10" + letter, {
        "comment": "single quantum trajectory of a resonantly driven chain; "
                   "chain length reduced from 18 to 14 spins for tractability",
        "task": "trajectories",
        "seed": 1,
        "network": net(14, 1.8, 0.0, gl),
        "trajectories": {"n_traj": 1, "t_max": 60.0, "samples": 61,
                         "probes": [[j, j + 1] for j in range(1, 14)]},
    })

# --- adiabatic preparation -------------------------------------------------
write("fig11b", {
    "comment": "N=8 two-tetramer pattern, sudden switch-on vs a ramp of "
               "duration 300",
    "task": "adiabatic",
    "network": net(8, 0.5, [0.0, 0.4, -0.4, 0.0, 0.0, 0.4, -0.4, 0.0], 0.5),
    "adiabatic": {"ramp_times": [300.0], "include_sudden": True, "settle_factor": 1.0},
})
write("fig11c", {
    "comment": "scattered-photon count vs ramp duration, N=4 tetramer pattern "
               "(the companion six-spin curve uses pattern 0,0.4,-0.4,0,0,0)",
    "task": "adiabatic",
    "network": net(4, 0.5, [0.0, 0.4, -0.4, 0.0], 0.5),
    "adiabatic": {"ramp_times": [30.0, 100.0, 300.0], "include_sudden": True,
                  "settle_factor": 1.0},
})

# --- Fisher information ------------------------------------------------------
write("fig12a", {
    "comment": "classical Fisher information of the resonant N=6 dimerized "
               "steady state vs drive strength, staggered-x generator and "
               "J^z measurement",
    "task": "sweep",
    "network": net(6, 0.0, 0.0, 0.5),
    "fisher": {"mode": "classical", "steady_method": "direct"},
    "sweep": {
        "subtask": "fisher",
        "axes": [{
            "name": "omega",
            "values": [0.5, 1.0, 2.0, 3.0, 5.0],
            "targets": [{"path": "network.drive.rabi"}],
        }],
    },
})
write("fig12b", {
    "comment": "quantum Fisher information over a (delta_a, delta_b) grid for "
               "the N=4 pattern (da, db, -db, -da) at Omega = 5; the generator "
               "is optimized over local directions rather than fixed (assumed)",
    "task": "sweep",
    "seed": 2,
    "network": net(4, 5.0, [0.0, 0.0, 0.0, 0.0], 0.5),
    "fisher": {"mode": "optimize", "restarts": 8, "steady_method": "direct"},
    "sweep": {
        "subtask": "fisher",
        "axes": [
            {"name": "delta_a", "values": {"start": 0.0, "stop": 1.0, "count": 5},
             "targets": [{"path": "network.drive.detuning[0]"},
                         {"path": "network.drive.detuning[3]", "scale": -1.0}]},
            {"name": "delta_b", "values": {"start": 0.0, "stop": 1.0, "count": 5},
             "targets": [{"path": "network.drive.detuning[1]"},
                         {"path": "network.drive.detuning[2]", "scale": -1.0}]},
        ],
    },
})

# --- optimal generator directions ---------------------------------------
write("fig13a", {
    "comment": "optimal local directions for the dimerized steady state; "
               "detuning magnitudes assumed",
    "task": "fisher",
    "seed": 3,
    "network": net(4, 5.0, [0.4, -0.4, 0.5, -0.5], 0.2),
    "fisher": {"mode": "optimize", "restarts": 16, "steady_method": "direct"},
})
write("fig13b", {
    "comment": "optimal local directions for the tetramerized steady state; "
               "detuning magnitudes assumed",
    "task": "fisher",
    "seed": 3,
    "network": net(4, 5.0, [0.0, 0.4, -0.4, 0.0], 0.2),
    "fisher": {"mode": "optimize", "restarts": 16, "steady_method": "direct"},
})
write("fig13c", {
    "comment": "optimal local directions for the eight-partite octamer "
               "(nested detuning pattern); detuning magnitudes assumed, and "
               "the drive is reduced to 1.0 (from the companion panels' 5.0) "
               "because the octamer's relaxation time grows with the square "
               "of the drive and its Liouvillian is too large for the direct "
               "steady-state solver",
    "task": "fisher",
    "seed": 3,
    "network": net(8, 1.0, [0.6, 0.4, 0.2, 0.1, -0.1, -0.2, -0.4, -0.6], 0.2),
    "fisher": {"mode": "optimize", "restarts": 16, "steady_t_max": 800.0},
})

print("wrote", len(os.listdir(OUT)), "scenario files")
