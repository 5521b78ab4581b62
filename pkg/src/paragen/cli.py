"""Command-line pipeline: mine -> train -> generate -> eval.

Exit codes: 0 success, 2 input or validation failure, 3 numerical failure,
1 anything unexpected. Flags override config-file values, which override the
built-in defaults; the effective configuration is echoed with --verbose.
"""

import argparse
import json
import logging
import sys

from .decoding import BeamConfig, beam_decode
from .errors import NumericalError, ValidationError
from .metrics import bleu
from .miner import (DEFAULT_ABBREVIATIONS, MineConfig, align, load_abbreviations,
                    load_documents, write_pairs)
from .training import (CheckpointError, TrainConfig, load_checkpoint, load_pairs_tsv,
                       train)
from .vocab import Vocabulary, tokenize

MINE_DEFAULTS = {"k": 3, "min_sim": 0.5, "max_sim": 0.95, "min_tokens": 4,
                 "max_tokens": 60, "stoplist": None, "threads": 1, "seed": 0}
TRAIN_DEFAULTS = {"epochs": 10, "lr": 1e-3, "clip": 2.0, "vocab_size": 10000,
                  "min_count": 1, "d_emb": 64, "d_h": 64, "d_s": 64, "d_a": 64,
                  "max_source_len": 50, "max_target_len": 50,
                  "checkpoint_interval": 10, "seed": 0}
GENERATE_DEFAULTS = {"beam": 4, "max_len": 50, "length_norm": 0.7,
                     "greedy": False, "plain": False, "force_p_gen": None, "seed": 0}
EVAL_DEFAULTS = {"smooth": False, "threads": 1, "seed": 0}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="paragen",
        description="Mine aligned paraphrase pairs and train a copy-capable "
                    "sequence-to-sequence paraphraser.")
    parser.add_argument("--config", default=None,
                        help="JSON config file; flags given explicitly win (default: none)")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for anything stochastic (default: 0)")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress and echo the effective config (default: off)")
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="mine aligned sentence pairs from documents")
    mine.add_argument("--docs", required=True, help="directory of JSON document files")
    mine.add_argument("--out", required=True, help="output TSV path (sidecar: <out>.jsonl)")
    mine.add_argument("--k", type=int, default=argparse.SUPPRESS,
                      help="neighbours per sentence (default: 3)")
    mine.add_argument("--min-sim", dest="min_sim", type=float, default=argparse.SUPPRESS,
                      help="similarity band lower bound (default: 0.5)")
    mine.add_argument("--max-sim", dest="max_sim", type=float, default=argparse.SUPPRESS,
                      help="similarity band upper bound (default: 0.95)")
    mine.add_argument("--min-tokens", dest="min_tokens", type=int, default=argparse.SUPPRESS,
                      help="shortest sentence kept (default: 4)")
    mine.add_argument("--max-tokens", dest="max_tokens", type=int, default=argparse.SUPPRESS,
                      help="longest sentence kept (default: 60)")
    mine.add_argument("--stoplist", default=argparse.SUPPRESS,
                      help="file of abbreviations that never end a sentence (default: built-in)")
    mine.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                      help="parallel query workers; output is identical (default: 1)")
    mine.set_defaults(func=cmd_mine, defaults=MINE_DEFAULTS)

    tr = sub.add_parser("train", help="train a model on a pair-per-line TSV")
    tr.add_argument("--data", required=True, help="training TSV (source TAB target)")
    tr.add_argument("--out", required=True,
                    help="checkpoint path (vocab: <out>.vocab, log: <out>.log)")
    tr.add_argument("--vocab", default=None,
                    help="load a fixed vocabulary file instead of building one")
    tr.add_argument("--epochs", type=int, default=argparse.SUPPRESS,
                    help="training epochs (default: 10)")
    tr.add_argument("--lr", type=float, default=argparse.SUPPRESS,
                    help="Adam learning rate (default: 0.001)")
    tr.add_argument("--clip", type=float, default=argparse.SUPPRESS,
                    help="global gradient-norm clip (default: 2.0)")
    tr.add_argument("--vocab-size", dest="vocab_size", type=int, default=argparse.SUPPRESS,
                    help="max vocabulary size including reserved ids (default: 10000)")
    tr.add_argument("--min-count", dest="min_count", type=int, default=argparse.SUPPRESS,
                    help="min token frequency for the vocabulary (default: 1)")
    tr.add_argument("--d-emb", dest="d_emb", type=int, default=argparse.SUPPRESS,
                    help="embedding width (default: 64)")
    tr.add_argument("--d-h", dest="d_h", type=int, default=argparse.SUPPRESS,
                    help="encoder width per direction (default: 64)")
    tr.add_argument("--d-s", dest="d_s", type=int, default=argparse.SUPPRESS,
                    help="decoder state width (default: 64)")
    tr.add_argument("--d-a", dest="d_a", type=int, default=argparse.SUPPRESS,
                    help="attention width (default: 64)")
    tr.add_argument("--max-source-len", dest="max_source_len", type=int,
                    default=argparse.SUPPRESS, help="source truncation length (default: 50)")
    tr.add_argument("--max-target-len", dest="max_target_len", type=int,
                    default=argparse.SUPPRESS, help="target truncation length (default: 50)")
    tr.add_argument("--checkpoint-interval", dest="checkpoint_interval", type=int,
                    default=argparse.SUPPRESS, help="epochs between checkpoints (default: 10)")
    tr.set_defaults(func=cmd_train, defaults=TRAIN_DEFAULTS)

    gen = sub.add_parser("generate", help="decode paraphrases for a file of sentences")
    gen.add_argument("--checkpoint", required=True, help="trained checkpoint path")
    gen.add_argument("--vocab", default=None,
                     help="vocabulary file (default: <checkpoint>.vocab)")
    gen.add_argument("--input", required=True, help="file with one source sentence per line")
    gen.add_argument("--out", required=True, help="output TSV of rank, score, hypothesis")
    gen.add_argument("--beam", type=int, default=argparse.SUPPRESS,
                     help="beam width (default: 4)")
    gen.add_argument("--greedy", action="store_true", default=argparse.SUPPRESS,
                     help="greedy decoding, same as --beam 1 (default: off)")
    gen.add_argument("--max-len", dest="max_len", type=int, default=argparse.SUPPRESS,
                     help="max decode length (default: 50)")
    gen.add_argument("--length-norm", dest="length_norm", type=float,
                     default=argparse.SUPPRESS,
                     help="length normalization exponent in [0,1] (default: 0.7)")
    gen.add_argument("--plain", action="store_true", default=argparse.SUPPRESS,
                     help="write only the best hypothesis text per line (default: off)")
    gen.add_argument("--force-p-gen", dest="force_p_gen", type=float,
                     default=argparse.SUPPRESS,
                     help="override the copy gate at inference, for ablations (default: off)")
    gen.set_defaults(func=cmd_generate, defaults=GENERATE_DEFAULTS)

    ev = sub.add_parser("eval", help="BLEU of a hypothesis file against a reference file")
    ev.add_argument("--hyp", required=True, help="hypothesis sentences, one per line")
    ev.add_argument("--ref", required=True, help="reference sentences, one per line")
    ev.add_argument("--smooth", action="store_true", default=argparse.SUPPRESS,
                    help="add-one smoothing of n-gram precisions (default: off)")
    ev.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                    help="accepted for symmetry; evaluation is one cheap pass (default: 1)")
    ev.set_defaults(func=cmd_eval, defaults=EVAL_DEFAULTS)
    return parser


def _effective(args):
    """defaults < config file section < explicitly passed flags."""
    merged = dict(args.defaults)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValidationError(f"{args.config}: config root must be a JSON object")
        section = raw.get(args.command, raw)
        merged.update({k: v for k, v in section.items()
                       if k in merged and not isinstance(v, dict)})
    merged.update({k: v for k, v in vars(args).items() if k in merged})
    if args.verbose:
        print("config: " + json.dumps({"command": args.command, **merged}, sort_keys=True),
              file=sys.stderr)
    return merged


def cmd_mine(args):
    cfg_map = _effective(args)
    abbrev = (load_abbreviations(cfg_map["stoplist"]) if cfg_map["stoplist"]
              else DEFAULT_ABBREVIATIONS)
    cfg = MineConfig(k=cfg_map["k"], min_sim=cfg_map["min_sim"], max_sim=cfg_map["max_sim"],
                     min_tokens=cfg_map["min_tokens"], max_tokens=cfg_map["max_tokens"],
                     abbreviations=abbrev)
    docs = load_documents(args.docs)
    pairs = align(docs, cfg, threads=cfg_map["threads"])
    write_pairs(pairs, args.out, args.out + ".jsonl")
    print(f"{len(pairs)} pairs")
    return 0


def cmd_train(args):
    cfg_map = _effective(args)
    cfg = TrainConfig(seed=cfg_map["seed"], epochs=cfg_map["epochs"], lr=cfg_map["lr"],
                      clip=cfg_map["clip"], max_source_len=cfg_map["max_source_len"],
                      max_target_len=cfg_map["max_target_len"],
                      vocab_size=cfg_map["vocab_size"], min_count=cfg_map["min_count"],
                      d_emb=cfg_map["d_emb"], d_h=cfg_map["d_h"], d_s=cfg_map["d_s"],
                      d_a=cfg_map["d_a"], checkpoint_interval=cfg_map["checkpoint_interval"])
    pairs = load_pairs_tsv(args.data)
    vocab = Vocabulary.load(args.vocab) if args.vocab else None
    if vocab is None:
        from .vocab import build_vocab
        corpus = [tokenize(x) for x, _ in pairs] + [tokenize(y) for _, y in pairs]
        vocab = build_vocab(corpus, max_size=cfg.vocab_size, min_count=cfg.min_count)
    vocab.save(args.out + ".vocab")
    _, report = train(pairs, cfg, vocab=vocab,
                      checkpoint_path=args.out, log_path=args.out + ".log")
    print(f"trained {cfg.epochs} epochs, final mean NLL {report.final_nll:.6f}")
    return 0


def cmd_generate(args):
    cfg_map = _effective(args)
    vocab_path = args.vocab if args.vocab else args.checkpoint + ".vocab"
    vocab = Vocabulary.load(vocab_path)
    params, _ = load_checkpoint(args.checkpoint, expected_vocab=vocab)
    width = 1 if cfg_map["greedy"] else cfg_map["beam"]
    cfg = BeamConfig(beam_width=width, max_len=cfg_map["max_len"],
                     length_norm=cfg_map["length_norm"])
    with open(args.input, encoding="utf-8") as fh:
        sources = [line for line in fh.read().splitlines() if line.strip()]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for source in sources:
            hyps = beam_decode(source, params, vocab, cfg,
                               force_p_gen=cfg_map["force_p_gen"])
            if cfg_map["plain"]:
                best = hyps[0] if hyps else None
                fh.write((" ".join(best.surface) if best else "") + "\n")
            else:
                for rank, hyp in enumerate(hyps[:width], start=1):
                    fh.write(f"{rank}\t{hyp.log_prob!r}\t{' '.join(hyp.surface)}\n")
    print(f"decoded {len(sources)} sentences")
    return 0


def cmd_eval(args):
    cfg_map = _effective(args)
    with open(args.hyp, encoding="utf-8") as fh:
        hyps = [tokenize(line) for line in fh.read().splitlines()]
    with open(args.ref, encoding="utf-8") as fh:
        refs = [tokenize(line) for line in fh.read().splitlines()]
    report = bleu(hyps, refs, smooth=cfg_map["smooth"])
    hits = sum(1 for h, r in zip(hyps, refs)
               for i, g in enumerate(r) if i < len(h) and h[i] == g)
    total = sum(len(r) for r in refs)
    out = report.as_dict()
    out["token_accuracy"] = hits / max(total, 1)
    print(json.dumps(out))
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, CheckpointError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
