"""Line-oriented batch text format and score output.

Format (UTF-8, '#' starts a comment, blank lines ignored):

    BATCH <num_reads> <num_haps>
    READ <bases> <baseQ> <insQ> <delQ> <gcpQ>     x num_reads
    HAP <bases>                                    x num_haps

Quality strings are Phred+33; all five READ fields must have equal length.
Scores are written one line per work item, `<batch> <read> <hap> <value>`
in enumeration order, followed by a `# cells=... seconds=... gcups=...`
comment when a run report is attached.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DataError, ParseError
from .model import Batch, Haplotype, ReadRecord, decode_bases, encode_bases

_PHRED_OFFSET = 33


def decode_phred_string(text: str):
    """Phred+33 string -> uint8 array."""
    out = np.empty(len(text), dtype=np.uint8)
    for pos, ch in enumerate(text):
        q = ord(ch) - _PHRED_OFFSET
        if not 0 <= q <= 93:
            raise DataError("illegal quality character %r at position %d"
                            % (ch, pos + 1))
        out[pos] = q
    return out


def encode_phred_string(qual) -> str:
    return "".join(chr(int(q) + _PHRED_OFFSET) for q in qual)


def _meaningful_lines(handle):
    for number, raw in enumerate(handle, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def parse_batch_file(path):
    """Parse a batch file; every error names the offending line."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = list(_meaningful_lines(handle))
    batches = []
    pos = 0

    def take(expected):
        nonlocal pos
        if pos >= len(lines):
            raise ParseError("unexpected end of file, expected %s" % expected,
                             lines[-1][0] if lines else 0)
        entry = lines[pos]
        pos += 1
        return entry

    while pos < len(lines):
        number, line = take("BATCH header")
        fields = line.split()
        if fields[0] != "BATCH":
            raise ParseError("expected BATCH header, got %r" % fields[0], number)
        if len(fields) != 3:
            raise ParseError("BATCH header needs <num_reads> <num_haps>", number)
        try:
            num_reads, num_haps = int(fields[1]), int(fields[2])
        except ValueError:
            raise ParseError("BATCH counts must be integers", number) from None
        if num_reads < 1 or num_haps < 1:
            raise ParseError("BATCH counts must be >= 1", number)

        reads = []
        for _ in range(num_reads):
            number, line = take("READ record")
            fields = line.split()
            if fields[0] != "READ":
                raise ParseError("expected READ record, got %r" % fields[0], number)
            if len(fields) != 6:
                raise ParseError(
                    "READ needs <bases> <baseQ> <insQ> <delQ> <gcpQ>", number)
            bases_text = fields[1]
            for track_name, track in zip(("baseQ", "insQ", "delQ", "gcpQ"),
                                         fields[2:]):
                if len(track) != len(bases_text):
                    raise ParseError(
                        "%s length %d does not match %d bases"
                        % (track_name, len(track), len(bases_text)), number)
            try:
                reads.append(ReadRecord(encode_bases(bases_text),
                                        *(decode_phred_string(t) for t in fields[2:])))
            except DataError as exc:
                raise ParseError(str(exc), number) from None

        haps = []
        for _ in range(num_haps):
            number, line = take("HAP record")
            fields = line.split()
            if fields[0] != "HAP":
                raise ParseError("expected HAP record, got %r" % fields[0], number)
            if len(fields) != 2:
                raise ParseError("HAP needs exactly one base string", number)
            try:
                haps.append(Haplotype(encode_bases(fields[1])))
            except DataError as exc:
                raise ParseError(str(exc), number) from None

        batches.append(Batch(tuple(reads), tuple(haps)))
    return batches


def write_batch_file(path, batches):
    with open(path, "w", encoding="utf-8") as handle:
        for batch in batches:
            handle.write("BATCH %d %d\n" % (len(batch.reads), len(batch.haps)))
            for read in batch.reads:
                handle.write("READ %s %s %s %s %s\n" % (
                    decode_bases(read.bases),
                    encode_phred_string(read.base_qual),
                    encode_phred_string(read.ins_qual),
                    encode_phred_string(read.del_qual),
                    encode_phred_string(read.gcp_qual)))
            for hap in batch.haps:
                handle.write("HAP %s\n" % decode_bases(hap.bases))


def format_score_lines(batches, scores, errors):
    """Score lines in (batch, read, hap) enumeration order; failed items
    carry their error kind instead of a value."""
    kind_of = dict(errors)
    lines = []
    gid = 0
    for b, batch in enumerate(batches):
        for r in range(len(batch.reads)):
            for h in range(len(batch.haps)):
                value = float(scores[gid])
                if gid in kind_of or math.isnan(value):
                    lines.append("%d %d %d ERROR:%s"
                                 % (b, r, h, kind_of.get(gid, "unscored")))
                else:
                    lines.append("%d %d %d %.6f" % (b, r, h, value))
                gid += 1
    return lines


def write_scores(path, batches, scores, errors, report=None):
    with open(path, "w", encoding="utf-8") as handle:
        for line in format_score_lines(batches, scores, errors):
            handle.write(line + "\n")
        if report is not None:
            handle.write("# cells=%d seconds=%.6f gcups=%.6f\n"
                         % (report.total_cells, report.wall_seconds, report.gcups))
