#!/usr/bin/env python3
"""Classify every canned example and print a one-line verdict for each."""

from flagwalk.classifier import classify
from flagwalk.examples import list_examples


def main():
    for ex in list_examples():
        label = classify(ex.flag, ex.embedding)
        status = "ok" if label.label == ex.expected_case else "MISMATCH"
        print(f"{ex.name:<20} {label.label:<9} expected {ex.expected_case:<9}"
              f" [{status}]  {ex.description}")


if __name__ == "__main__":
    main()
