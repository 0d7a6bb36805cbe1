#!/usr/bin/env python3
"""Writes MobileNetV1 network documents for a width multiplier."""
import argparse
import json

# (output channels at alpha=1, stride) for the 13 separable blocks
BLOCKS = [(64, 1), (128, 2), (128, 1), (256, 2), (256, 1), (512, 2),
          (512, 1), (512, 1), (512, 1), (512, 1), (512, 1), (1024, 2), (1024, 1)]


def mobilenet(alpha: float, rate: str = "3") -> dict:
    ch = lambda c: int(c * alpha)
    layers = [{"name": "conv1", "kind": "conv", "k": 3, "s": 2, "p": 1, "d_out": ch(32)}]
    for i, (c, s) in enumerate(BLOCKS, start=2):
        layers.append({"name": f"dws{i}", "kind": "dwsep", "k": 3, "s": s, "p": 1, "d_out": ch(c)})
    layers.append({"name": "avgpool", "kind": "avgpool", "k": 7, "s": 7})
    layers.append({"name": "fc", "kind": "fc", "d_out": 1000})
    return {
        "name": f"mobilenet_v1_{alpha}",
        "input": {"height": 224, "width": 224, "channels": 3, "rate": rate},
        "quant": {"weight_bits": 8, "activation_bits": 8},
        "layers": layers,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("alpha", type=float)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args()
    with open(args.output, "w") as fh:
        json.dump(mobilenet(args.alpha), fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
