"""lp - Larson-Penston profile by shooting on y* in (2, 3)."""
from pathlib import Path

import numpy as np

from hunter.analysis import count_intersections, count_sonic_points, residual_max
from hunter.cli.context import common_options, load_run_config
from hunter.io.export import write_json, write_profile, write_traces
from hunter.physics.larson_penston import larson_penston_solve
from hunter.schemas import LPSummary, ProfileSidecar


def register(subparsers) -> None:
    parser = subparsers.add_parser("lp", parents=[common_options()], help="Larson-Penston profile")
    parser.add_argument("--profile-ymax", type=float, default=1e3, help="outer end of the profile")
    parser.set_defaults(handler=run)


def run(args) -> int:
    config = load_run_config(args, "lp")
    out = Path(config.output_dir)
    solution = larson_penston_solve(config.match, y_max=args.profile_ymax)
    profile = solution.profile
    intersections = count_intersections(profile).count
    sonic = count_sonic_points(profile, tol=config.match.classification_tol)
    res = residual_max(profile)
    _, u = profile.evaluate(np.geomspace(max(profile.y_min, 1e-6), profile.y_max, 2000))

    write_profile(profile, out / "lp_profile.csv")
    write_traces(profile, out / "traces_lp.csv")
    write_json(ProfileSidecar(kind="larson_penston", y_star=solution.y_star, intersections=intersections,
                              sonic_count=len(sonic), residual_max=res), out / "lp_profile.json")
    write_json(LPSummary(y_star=solution.y_star, rho0=solution.rho0, seam_u=solution.seam_u,
                         far_field_p=solution.far_field_p, far_field_u=solution.far_field_u,
                         intersections=intersections, sonic_count=len(sonic), residual_max=res,
                         u_sign=int(np.sign(u).min()) if np.all(u < 0) or np.all(u > 0) else 0),
               out / "lp.json")
    print(f"y*={solution.y_star:.12f} intersections={intersections} sonic={len(sonic)} residual={res:.2e}")
    return 0
