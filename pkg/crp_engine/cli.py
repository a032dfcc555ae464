# -*- encoding: utf-8 -*-
#
# Copyright © 2024 The crp-engine Authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.
"""The ``crp-engine`` command.

Standard output only carries JSON documents; logs go to standard error.
Exit status is 0 when every report passes, 1 when one fails and 2 when the
configuration is rejected.
"""

import argparse
import json
import sys

import daiquiri

from crp_engine import exceptions
from crp_engine import frequencies
from crp_engine import logs
from crp_engine import partitions
from crp_engine import urn
from crp_engine import utils
from crp_engine.harness import experiments
from crp_engine.harness import output
from crp_engine.harness import runner
from crp_engine.harness import schema


LOG = daiquiri.getLogger(__name__)


def _print(document):
    print(json.dumps(output.json_safe(document), sort_keys=True))


def simulate_crp(args):
    params = partitions.CrpParams(args.alpha, args.theta)
    trajectory = partitions.simulate_crp(args.n, params, args.seed)
    _print(
        {
            "model": "crp",
            "alpha": args.alpha,
            "theta": args.theta,
            "n": args.n,
            "seed": args.seed,
            "k": trajectory.k,
            "k_ratio": trajectory.k_ratio(),
            "expected_k": partitions.expected_components(args.n, params),
            "size_counts": {str(j): c for j, c in trajectory.final_size_counts.items()},
        }
    )
    return runner.EXIT_PASSED


def simulate_urn(args):
    truncation = args.truncation
    if truncation is None:
        truncation = experiments.truncation_for(args.alpha, args.n)
    real, weight = frequencies.sample_pd(
        args.alpha,
        args.theta,
        truncation,
        utils.derive_seed(args.seed, experiments.REALIZATION_STREAM),
        args.route,
    )
    occ = urn.sample_occupancy(
        real, args.n, utils.derive_seed(args.seed, experiments.OCCUPANCY_STREAM)
    )
    _print(
        {
            "model": "urn",
            "alpha": args.alpha,
            "theta": args.theta,
            "n": args.n,
            "seed": args.seed,
            "route": args.route,
            "truncation": truncation,
            "realization": real.fingerprint,
            "diversity": real.diversity,
            "weight": weight,
            "k": occ.k,
            "conditional_mean_k": urn.conditional_mean_k(real, args.n),
            "size_counts": {str(j): c for j, c in occ.size_counts().items()},
        }
    )
    return runner.EXIT_PASSED


def simulate(args):
    if args.model == "crp":
        return simulate_crp(args)
    return simulate_urn(args)


def experiment(args):
    experiment_config = schema.load_config(
        args.config, args.override, kind=args.kind, output=args.output
    )
    result = runner.run_experiment(experiment_config, args.workers)
    _print(result.summary())
    return result.status


def validate_config(args):
    experiment_config = schema.load_config(args.config, args.override)
    _print({"valid": True, "config": experiment_config.to_json()})
    return runner.EXIT_PASSED


def replay(args):
    result = runner.replay(args.metadata, args.output, args.workers)
    _print(result.summary())
    return result.status


def _add_override(parser):
    parser.add_argument(
        "--override",
        "-O",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config field, VALUE is read as JSON when it parses",
    )


def _add_workers(parser):
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker processes (default: CRPENGINE_WORKERS)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crp-engine",
        description=(
            "Simulate (alpha, theta) random partitions and check their limit laws"
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    draw = subparsers.add_parser("simulate", help="Draw one partition")
    draw.add_argument("model", choices=["crp", "urn"])
    draw.add_argument("--alpha", type=float, default=0.5)
    draw.add_argument("--theta", type=float, default=0.0)
    draw.add_argument("--n", type=int, default=1000)
    draw.add_argument("--seed", type=int, default=0)
    draw.add_argument("--truncation", type=int, default=None)
    draw.add_argument("--route", choices=frequencies.ROUTES, default="gem")
    draw.set_defaults(func=simulate)

    run = subparsers.add_parser("experiment", help="Run a verification experiment")
    run.add_argument("kind", choices=schema.KINDS)
    run.add_argument("--config", "-c", default=None, help="JSON config document")
    _add_override(run)
    run.add_argument("--output", "-o", default=None, help="Output directory")
    _add_workers(run)
    run.set_defaults(func=experiment)

    validate = subparsers.add_parser(
        "validate-config", help="Check a config document without running it"
    )
    validate.add_argument("config")
    _add_override(validate)
    validate.set_defaults(func=validate_config)

    again = subparsers.add_parser(
        "replay", help="Run again the experiment described by a metadata.json"
    )
    again.add_argument("metadata")
    again.add_argument("--output", "-o", default=None, help="Output directory")
    _add_workers(again)
    again.set_defaults(func=replay)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logs.setup_logging()
    try:
        return args.func(args)
    except exceptions.InvalidExperimentConfig as e:
        LOG.warning("invalid configuration", error=str(e))
        _print(e.as_dict())
        return runner.EXIT_INVALID_CONFIG
    except exceptions.OutputDirectoryError as e:
        LOG.warning("output not writable", error=str(e))
        _print({"error": "invalid-output", "message": str(e)})
        return runner.EXIT_INVALID_CONFIG
    except exceptions.OutputFormatError as e:
        LOG.warning("invalid metadata", error=str(e))
        _print({"error": "invalid-metadata", "message": str(e)})
        return runner.EXIT_INVALID_CONFIG
    except (exceptions.InvalidParameters, exceptions.TruncationError) as e:
        LOG.warning("invalid parameters", error=str(e))
        _print({"error": "invalid-parameters", "message": str(e)})
        return runner.EXIT_INVALID_CONFIG


if __name__ == "__main__":
    sys.exit(main())
