"""Independent canonical encoder for genesis state and blocks.

Integers are big-endian; strings and byte fields carry a u32 length prefix;
amounts are i128 counts of 1e-18 units; maps are written in ascending key
order. Used to pin the genesis state root and genesis block hash.
"""
import hashlib
import struct
from decimal import Decimal

UNIT = 10 ** 18
DEFAULT_STEP_LIMIT = 1_000_000


def u8(v):
    return struct.pack(">B", v)


def u32(v):
    return struct.pack(">I", v)


def u64(v):
    return struct.pack(">Q", v)


def i32(v):
    return struct.pack(">i", v)


def i128(v):
    return (v % (1 << 128)).to_bytes(16, "big")


def blob(b):
    return u32(len(b)) + b


def text(s):
    return blob(s.encode())


def units(amount):
    d = Decimal(str(amount)) * UNIT
    if d != d.to_integral_value():
        raise ValueError("more than 18 fractional digits")
    return int(d)


def amounts(m):
    out = u32(len(m))
    for k in sorted(m, key=lambda s: s.encode()):
        out += text(k) + i128(m[k])
    return out


def genesis_state(cfg):
    accounts = {a["id"]: {"coins": units(a["coins"]), "assets": {}} for a in cfg["accounts"]}
    supply = {}
    for a in cfg.get("assets", []):
        n = units(a["issuance"])
        supply[a["assetId"]] = n
        if n:
            accounts[a["holder"]]["assets"][a["assetId"]] = n
    return {
        "height": 0,
        "next": max(accounts) + 1,
        "stepLimit": cfg.get("stepLimit", DEFAULT_STEP_LIMIT),
        "registry": sorted(supply, key=lambda s: s.encode()),
        "coinSupply": sum(a["coins"] for a in accounts.values()),
        "assetSupply": supply,
        "accounts": accounts,
    }


def encode_state(s):
    out = u64(s["height"]) + u64(s["next"]) + u64(s["stepLimit"])
    out += u32(len(s["registry"])) + b"".join(text(r) for r in s["registry"])
    out += i128(s["coinSupply"]) + amounts(s["assetSupply"])
    out += u32(len(s["accounts"]))
    for aid in sorted(s["accounts"]):
        a = s["accounts"][aid]
        out += u64(aid) + i128(a["coins"]) + amounts(a["assets"]) + u64(0) + u8(0) + u32(0)
    return out


def encode_tx(tx):
    out = u64(tx["sender"]) + u64(tx["receiver"]) + i32(tx.get("action", 0)) + i128(units(tx.get("coins", 0)))
    asset = tx.get("asset")
    out += u8(1) + text(asset["assetId"]) + i128(units(asset["amount"])) if asset else u8(0)
    out += blob(bytes.fromhex(tx.get("dataHex", ""))) + u64(tx["seq"])
    return out


def encode_block(height, parent, proposer, tick, txs, root):
    out = u64(height) + parent + u32(proposer) + u64(tick) + u32(len(txs))
    out += b"".join(encode_tx(t) for t in txs)
    return out + root


def genesis_pins(cfg):
    state_root = hashlib.sha256(encode_state(genesis_state(cfg))).digest()
    block = encode_block(0, bytes(32), 0, 0, [], state_root)
    return {"stateRoot": state_root.hex(), "blockHash": hashlib.sha256(block).hexdigest()}
