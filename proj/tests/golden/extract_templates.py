#!/usr/bin/env python3
# Copyright 2026 The avtime Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerate templates.txt from the LaTeX source of the three template listings.

Usage: extract_templates.py SOURCE.md > templates.txt
Each output line is: group<TAB>id<TAB>rendered text
"""
import re
import sys

TAU = "from 18 to 34"
ONE = "rain"
MANY = "rain, thunder"
TAU_MARK = "$\\tau$"
MULTI_MARK = "<event>$_1$, <event>$_2$, ..."


def boxes(src):
    out = {}
    for m in re.finditer(r"title=\{\\small Box (\d):.*?\n(.*?)\\end\{tcolorbox\}", src, re.S):
        out[int(m.group(1))] = m.group(2)
    return out


def items(body):
    for m in re.finditer(r"\$([QR])_\{?(\d+)\}?\$: (.*?)(?:\\\\)?$", body, re.M):
        yield m.group(1) + m.group(2), m.group(3).strip()


def main():
    src = open(sys.argv[1], encoding="utf-8").read()
    b = boxes(src)
    for ident, text in items(b[1]):
        print(f"1\t{ident}\t{text}")
    for ident, text in items(b[2]):
        print(f"2\t{ident}\t{text.replace(TAU_MARK, TAU)}")
    for ident, text in items(b[3]):
        text = text.replace(MULTI_MARK, MANY) if MULTI_MARK in text else text.replace("<event>", ONE)
        print(f"3\t{ident}\t{text}")


if __name__ == "__main__":
    main()
