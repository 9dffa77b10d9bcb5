"""Command-line front end.

    punchcard server run --config server.conf
    punchcard server purge --config server.conf
    punchcard wallet new-card --wallet w.bin [--scheme mergeable]
    punchcard wallet list --wallet w.bin
    punchcard wallet punch --wallet w.bin --card 0 --port 7907 [-t 3]
    punchcard wallet redeem --wallet w.bin --card 0 --port 7907
    punchcard wallet merge-redeem --wallet w.bin --card-a 0 [--card-b 1] --port 7907
    punchcard bench main|mergeable [--trials N] [--db-size N] [--csv out.csv]
    punchcard attacks run [--seed N] [--json out.json] [--quick]
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import date

from . import attacks, bench, extensions, service
from .core import RedeemStatus
from .db import RedeemDb
from .errors import ConfigError, PunchcardError
from .wallet import Wallet, _MAGIC, _SCHEME_MAIN


def _open_wallet(path: str, scheme: str = None) -> Wallet:
    if os.path.exists(path):
        with open(path, "rb") as f:
            head = f.read(5)
        if len(head) < 5 or head[:4] != _MAGIC:
            raise PunchcardError(f"{path} is not a wallet file")
        scheme = "main" if head[4] == _SCHEME_MAIN else "mergeable"
    return Wallet(path, scheme=scheme or "main")


def _client(args) -> service.Client:
    return service.Client(args.host, args.port)


def _print_status(status: RedeemStatus) -> int:
    print(f"redeem: {status.name}")
    return 0 if status is RedeemStatus.ACCEPT else 1


def cmd_server_run(args) -> int:
    try:
        cfg = service.load_config(args.config)
    except ConfigError as e:
        print(f"config: {e}", file=sys.stderr)
        return service.EXIT_CONFIG
    return service.run_server(cfg)


def cmd_server_purge(args) -> int:
    try:
        cfg = service.load_config(args.config)
    except ConfigError as e:
        print(f"config: {e}", file=sys.stderr)
        return service.EXIT_CONFIG
    db = RedeemDb(os.path.join(cfg.state_dir, "redeemed.db"), fsync=cfg.fsync)
    try:
        dropped = extensions.purge_expired(db, date.today())
    finally:
        db.close()
    print(f"purged {dropped} expired secrets, {len(db)} remain")
    return 0


def cmd_wallet_new_card(args) -> int:
    wallet = _open_wallet(args.wallet, scheme=args.scheme)
    index = wallet.new_card()
    print(f"card #{index} created")
    return 0


def cmd_wallet_list(args) -> int:
    wallet = _open_wallet(args.wallet)
    if not wallet.cards:
        print("wallet is empty")
        return 0
    print(f"{'card':<6}{'id':<10}{'punches':>8}")
    for index, prefix, count in wallet.rows():
        print(f"{index:<6}{prefix:<10}{count:>8}")
    return 0


def cmd_wallet_punch(args) -> int:
    wallet = _open_wallet(args.wallet)
    with _client(args) as client:
        if args.times > 1:
            gained = wallet.multi_punch(client, args.card, args.times)
            print(f"card #{args.card}: +{gained} punches")
        else:
            wallet.punch(client, args.card)
            print(f"card #{args.card}: +1 punch")
        print(f"card #{args.card} now has {wallet.cards[args.card].count} punches")
    return 0


def cmd_wallet_redeem(args) -> int:
    wallet = _open_wallet(args.wallet)
    with _client(args) as client:
        return _print_status(wallet.redeem(client, args.card))


def cmd_wallet_merge_redeem(args) -> int:
    wallet = _open_wallet(args.wallet)
    with _client(args) as client:
        return _print_status(
            wallet.merge_redeem(client, args.card_a, args.card_b)
        )


def cmd_bench(args) -> int:
    try:
        if args.scheme == "main":
            result = bench.bench_main(trials=args.trials, db_size=args.db_size)
        else:
            result = bench.bench_mergeable(trials=args.trials)
    except ValueError as e:
        print(f"bench: {e}", file=sys.stderr)
        return 1
    print(bench.render_table(result))
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            f.write(bench.render_csv(result))
        print(f"csv written to {args.csv}")
    return 0


def cmd_attacks_run(args) -> int:
    kwargs = {}
    if args.quick:
        kwargs = {
            "replay_trials": 20,
            "key_switch_trials": 50,
            "eavesdropper_guesses": 500,
        }
    report = attacks.run_all(seed=args.seed, **kwargs)
    print(attacks.render_report(report))
    if args.json:
        with open(args.json, "w") as f:
            f.write(attacks.report_to_json(report))
        print(f"report written to {args.json}")
    return 0 if report["all_defeated"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="punchcard", description="privacy-preserving loyalty punch cards"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    server = sub.add_parser("server", help="run or maintain a server")
    server_sub = server.add_subparsers(dest="server_command", required=True)
    run = server_sub.add_parser("run")
    run.add_argument("--config", default=None)
    run.set_defaults(func=cmd_server_run)
    purge = server_sub.add_parser("purge")
    purge.add_argument("--config", default=None)
    purge.set_defaults(func=cmd_server_purge)

    wallet = sub.add_parser("wallet", help="hold and use cards")
    wallet_sub = wallet.add_subparsers(dest="wallet_command", required=True)

    def wallet_common(p, network=True):
        p.add_argument("--wallet", required=True)
        if network:
            p.add_argument("--host", default="127.0.0.1")
            p.add_argument("--port", type=int, default=7907)

    new_card = wallet_sub.add_parser("new-card")
    wallet_common(new_card, network=False)
    new_card.add_argument("--scheme", choices=("main", "mergeable"), default="main")
    new_card.set_defaults(func=cmd_wallet_new_card)

    listing = wallet_sub.add_parser("list")
    wallet_common(listing, network=False)
    listing.set_defaults(func=cmd_wallet_list)

    punch = wallet_sub.add_parser("punch")
    wallet_common(punch)
    punch.add_argument("--card", type=int, required=True)
    punch.add_argument("-t", "--times", type=int, default=1)
    punch.set_defaults(func=cmd_wallet_punch)

    redeem = wallet_sub.add_parser("redeem")
    wallet_common(redeem)
    redeem.add_argument("--card", type=int, required=True)
    redeem.set_defaults(func=cmd_wallet_redeem)

    merge = wallet_sub.add_parser("merge-redeem")
    wallet_common(merge)
    merge.add_argument("--card-a", type=int, required=True)
    merge.add_argument("--card-b", type=int, default=None)
    merge.set_defaults(func=cmd_wallet_merge_redeem)

    bench_p = sub.add_parser("bench", help="timing and size measurements")
    bench_p.add_argument("scheme", choices=("main", "mergeable"))
    bench_p.add_argument("--trials", type=int, default=bench.MIN_TRIALS)
    bench_p.add_argument("--db-size", type=int, default=0)
    bench_p.add_argument("--csv", default=None)
    bench_p.set_defaults(func=cmd_bench)

    attacks_p = sub.add_parser("attacks", help="adversarial self-checks")
    attacks_sub = attacks_p.add_subparsers(dest="attacks_command", required=True)
    attacks_run = attacks_sub.add_parser("run")
    attacks_run.add_argument("--seed", type=int, default=7)
    attacks_run.add_argument("--json", default=None)
    attacks_run.add_argument("--quick", action="store_true")
    attacks_run.set_defaults(func=cmd_attacks_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except PunchcardError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
