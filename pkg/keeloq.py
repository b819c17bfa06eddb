#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Keeloq and width-parameterised mini-Keeloq, with desk-scale fixed-point attacks.

Conventions: bit i of a block integer is L_i (bit 0 = P_0), bit i of a key
integer is k_i. Round r (0-based) consumes key bit r mod 2w, shifts the w-bit
register right and inserts

    k ^ b_0 ^ b_{w/2} ^ NLF(b_{w-t1}, b_{w-t2}, b_{w-t3}, b_{w-t4}, b_{w-t5})

at the top. Encryption is 8 applications of f (2w rounds) followed by g (w/2
rounds, key bits 0..w/2-1). All round code is bit-sliced over numpy uint64
arrays, so a whole code-book or a whole key range runs in one pass.

The subkey search inside one attack is vectorised, not spread over
processes: it walks candidate subkeys in turn and stops at the first
verified key. Worker pools split independent key trials instead
(run_attack_trials), one trial per task.
"""

import itertools
import logging
import math
import multiprocessing
import struct
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from errors import ConfigurationError, ConsistencyError, DomainError
from permlab import Permutation, point_cycle_lengths, trial_rng

logger = logging.getLogger(__name__)

U64 = np.uint64
ONE = U64(1)

TEXTBOOK_TAPS = (1, 6, 12, 23, 30)
DEPLOYED_TAPS = (1, 6, 12, 23, 31)
MAX_MATERIALISED_WIDTH = 24
MAX_ATTACK_WIDTH = 16
DEFAULT_PROBES = 8

CODEBOOK_MAGIC = b'PCLB'
CODEBOOK_VERSION = 1
CODEBOOK_HEADER = struct.Struct('<4sHHQ')

IntOrArray = Union[int, np.ndarray]


def _nlf_bit(a: int, b: int, c: int, d: int, e: int) -> int:
    return (d ^ e ^ (a & c) ^ (a & e) ^ (b & c) ^ (b & e) ^ (c & d) ^ (d & e)
            ^ (a & d & e) ^ (a & c & e) ^ (a & b & d) ^ (a & b & c))


def _nlf_table() -> int:
    table = 0
    for idx in range(32):
        a, b, c, d, e = ((idx >> s) & 1 for s in (4, 3, 2, 1, 0))
        table |= _nlf_bit(a, b, c, d, e) << idx
    return table


# 0x3A5C742E, indexed as a<<4 | b<<3 | c<<2 | d<<1 | e
NLF_TABLE = _nlf_table()
_NLF_TABLE_U64 = U64(NLF_TABLE)


def nlf(a: int, b: int, c: int, d: int, e: int) -> int:
    return (NLF_TABLE >> ((a << 4) | (b << 3) | (c << 2) | (d << 1) | e)) & 1


def _scaled_taps(width: int) -> Tuple[int, ...]:
    taps, prev = [], 0
    for t in TEXTBOOK_TAPS:
        tap = max(prev + 1, max(1, (t * width) // 32))
        taps.append(tap)
        prev = tap
    return tuple(taps)


@dataclass(frozen=True)
class MiniParams:
    """Width and non-linear taps of a (mini-)Keeloq instance."""
    width: int
    nlf_taps: Tuple[int, ...]

    def __post_init__(self):
        w = self.width
        if not isinstance(w, int) or w % 2 or not 8 <= w <= 32:
            raise ConfigurationError(f"width must be even and between 8 and 32, got {w!r}")
        taps = tuple(int(t) for t in self.nlf_taps)
        if len(taps) != 5 or len(set(taps)) != 5:
            raise ConfigurationError(f"need 5 distinct NLF taps, got {self.nlf_taps!r}")
        if any(not 1 <= t <= w - 1 for t in taps):
            raise ConfigurationError(f"NLF taps must lie in 1..{w - 1}, got {taps}")
        object.__setattr__(self, 'nlf_taps', taps)

    @classmethod
    def keeloq(cls) -> 'MiniParams':
        return cls(32, TEXTBOOK_TAPS)

    @classmethod
    def deployed(cls) -> 'MiniParams':
        """Bit ordering of fielded Keeloq implementations (last tap L_{i-31})."""
        return cls(32, DEPLOYED_TAPS)

    @classmethod
    def mini(cls, width: int, nlf_taps: Optional[Tuple[int, ...]] = None) -> 'MiniParams':
        if not isinstance(width, int) or width % 2 or not 8 <= width <= 32:
            raise ConfigurationError(f"width must be even and between 8 and 32, got {width!r}")
        return cls(width, tuple(nlf_taps) if nlf_taps else _scaled_taps(width))

    @property
    def key_bits(self) -> int:
        return 2 * self.width

    @property
    def g_rounds(self) -> int:
        return self.width // 2

    @property
    def f_rounds(self) -> int:
        return 2 * self.width

    @property
    def total_rounds(self) -> int:
        return 8 * self.f_rounds + self.g_rounds

    @property
    def linear_taps(self) -> Tuple[int, int]:
        return (self.width, self.width // 2)

    @property
    def block_mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def key_mask(self) -> int:
        return (1 << self.key_bits) - 1

    @property
    def subkey_mask(self) -> int:
        return (1 << self.g_rounds) - 1

    def to_dict(self) -> Dict[str, object]:
        return {'width': self.width, 'nlf_taps': list(self.nlf_taps),
                'key_bits': self.key_bits, 'total_rounds': self.total_rounds}


KEELOQ = MiniParams.keeloq()


@dataclass(frozen=True)
class KeeloqKey:
    """Key bits k_0..k_{bits-1}; ``value`` bit i is k_i."""
    value: int
    bits: int = 64

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.bits):
            raise DomainError(f"key does not fit in {self.bits} bits")

    @classmethod
    def from_hex(cls, text: str, bits: int = 64) -> 'KeeloqKey':
        try:
            return cls(int(text, 16), bits)
        except ValueError as e:
            raise DomainError(f"not a hexadecimal key: {text!r}") from e

    def bit(self, i: int) -> int:
        return (self.value >> i) & 1

    def subkey(self, bits: int) -> int:
        return self.value & ((1 << bits) - 1)

    def to_hex(self) -> str:
        return format(self.value, f"0{self.bits // 4}x")


@dataclass(frozen=True)
class Block:
    """A w-bit block; ``value`` bit i is L_i."""
    value: int
    width: int = 32

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.width):
            raise DomainError(f"block does not fit in {self.width} bits")

    @classmethod
    def from_hex(cls, text: str, width: int = 32) -> 'Block':
        try:
            return cls(int(text, 16), width)
        except ValueError as e:
            raise DomainError(f"not a hexadecimal block: {text!r}") from e

    def bit(self, i: int) -> int:
        return (self.value >> i) & 1

    def to_hex(self) -> str:
        return format(self.value, f"0{(self.width + 3) // 4}x")


def _as_u64(x, limit_bits: int, what: str) -> np.ndarray:
    try:
        arr = np.atleast_1d(np.asarray(x, dtype=np.uint64))
    except (OverflowError, ValueError, TypeError) as e:
        raise DomainError(f"{what} must be non-negative integers") from e
    if limit_bits < 64 and arr.size and int(arr.max()) >> limit_bits:
        raise DomainError(f"{what} does not fit in {limit_bits} bits")
    return arr


def _nlf_vec(state: np.ndarray, positions: Tuple[int, ...]) -> np.ndarray:
    idx = np.zeros_like(state)
    for shift, pos in zip((4, 3, 2, 1, 0), positions):
        idx |= ((state >> U64(pos)) & ONE) << U64(shift)
    return (_NLF_TABLE_U64 >> idx) & ONE


def _forward(state: np.ndarray, key: np.ndarray, params: MiniParams, first: int, count: int) -> np.ndarray:
    w = params.width
    top, half = U64(w - 1), U64(w // 2)
    positions = tuple(w - t for t in params.nlf_taps)
    for r in range(first, first + count):
        kbit = (key >> U64(r % params.key_bits)) & ONE
        new = kbit ^ (state & ONE) ^ ((state >> half) & ONE) ^ _nlf_vec(state, positions)
        state = (state >> ONE) | (new << top)
    return state


def _backward(state: np.ndarray, key: np.ndarray, params: MiniParams, last: int, count: int) -> np.ndarray:
    """Undo rounds last, last-1, ..., last-count+1."""
    w = params.width
    top, half_minus_one = U64(w - 1), U64(w // 2 - 1)
    mask = U64(params.block_mask)
    positions = tuple(w - t - 1 for t in params.nlf_taps)
    for r in range(last, last - count, -1):
        kbit = (key >> U64(r % params.key_bits)) & ONE
        oldest = ((state >> top) & ONE) ^ kbit ^ ((state >> half_minus_one) & ONE) ^ _nlf_vec(state, positions)
        state = ((state << ONE) & mask) | oldest
    return state


def _run(x, key, params: MiniParams, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
         key_bits: Optional[int] = None) -> IntOrArray:
    scalar = np.ndim(x) == 0 and np.ndim(key) == 0
    state = _as_u64(x, params.width, "block")
    keys = _as_u64(key, key_bits or params.key_bits, "key")
    state, keys = np.broadcast_arrays(state, keys)
    out = fn(state.copy(), keys)
    return int(out[0]) if scalar else out


def mini_encrypt(p: IntOrArray, key: IntOrArray, params: MiniParams) -> IntOrArray:
    return _run(p, key, params, lambda s, k: _forward(s, k, params, 0, params.total_rounds))


def mini_decrypt(c: IntOrArray, key: IntOrArray, params: MiniParams) -> IntOrArray:
    return _run(c, key, params,
                lambda s, k: _backward(s, k, params, params.total_rounds - 1, params.total_rounds))


def mini_f(x: IntOrArray, key: IntOrArray, params: MiniParams) -> IntOrArray:
    """2w rounds with key bits 0..2w-1; every f in the schedule is this same map."""
    return _run(x, key, params, lambda s, k: _forward(s, k, params, 0, params.f_rounds))


def mini_f_power(x: IntOrArray, key: IntOrArray, params: MiniParams, times: int) -> IntOrArray:
    return _run(x, key, params, lambda s, k: _forward(s, k, params, 0, params.f_rounds * times))


def mini_g(x: IntOrArray, key: IntOrArray, params: MiniParams) -> IntOrArray:
    """w/2 rounds; only key bits 0..w/2-1 are read."""
    return _run(x, key, params, lambda s, k: _forward(s, k, params, 0, params.g_rounds))


def mini_g_invert(c: IntOrArray, subkey: IntOrArray, params: MiniParams) -> IntOrArray:
    return _run(c, subkey, params,
                lambda s, k: _backward(s, k, params, params.g_rounds - 1, params.g_rounds),
                key_bits=params.g_rounds)


def keeloq_encrypt(p: IntOrArray, key: IntOrArray) -> IntOrArray:
    return mini_encrypt(p, key, KEELOQ)


def keeloq_decrypt(c: IntOrArray, key: IntOrArray) -> IntOrArray:
    return mini_decrypt(c, key, KEELOQ)


def f_apply(x: IntOrArray, key: IntOrArray) -> IntOrArray:
    return mini_f(x, key, KEELOQ)


def g_apply(x: IntOrArray, key: IntOrArray) -> IntOrArray:
    return mini_g(x, np.asarray(key, dtype=np.uint64) & U64(KEELOQ.subkey_mask), KEELOQ)


def g_invert(c: IntOrArray, subkey16: IntOrArray) -> IntOrArray:
    return mini_g_invert(c, subkey16, KEELOQ)


def _require_materialisable(params: MiniParams, limit: int = MAX_MATERIALISED_WIDTH) -> None:
    if params.width > limit:
        raise DomainError(f"width {params.width} is above the in-memory limit of {limit}")


def f_permutation(key: int, params: MiniParams) -> Permutation:
    """f as a permutation of all 2**w blocks (w <= 16)."""
    _require_materialisable(params, MAX_ATTACK_WIDTH)
    blocks = np.arange(1 << params.width, dtype=np.uint64)
    return Permutation(mini_f(blocks, key, params).astype(np.int64))


def f_fixed_points(key: int, params: MiniParams) -> np.ndarray:
    _require_materialisable(params)
    blocks = np.arange(1 << params.width, dtype=np.uint64)
    return np.flatnonzero(mini_f(blocks, key, params) == blocks).astype(np.uint64)


def f_fixed_point_profile(key: int, params: MiniParams) -> Tuple[int, int]:
    """(fixed points of f, fixed points of f**8) for one key, w <= 16."""
    lengths = point_cycle_lengths(f_permutation(key, params).mapping)
    return int(np.count_nonzero(lengths == 1)), int(np.count_nonzero(8 % lengths == 0))


def fixed_point_keys(p: int, subkey: int, params: MiniParams) -> np.ndarray:
    """Every key with low w/2 bits ``subkey`` and f(p) = p.

    Key bits w/2..w-1 are free (2**(w/2) choices); once the first w rounds have
    run, each of the last w rounds must insert bit r-w of p, which fixes key bit r.
    """
    w, half = params.width, params.g_rounds
    p = int(p)
    if not 0 <= p <= params.block_mask or not 0 <= subkey <= params.subkey_mask:
        raise DomainError("plaintext or subkey out of range")
    keys = U64(subkey) | (np.arange(1 << (w - half), dtype=np.uint64) << U64(half))
    state = _forward(np.full(keys.shape, p, dtype=np.uint64), keys, params, 0, w)
    top, half_u = U64(w - 1), U64(half)
    positions = tuple(w - t for t in params.nlf_taps)
    for r in range(w, 2 * w):
        wanted = U64((p >> (r - w)) & 1)
        kbit = wanted ^ (state & ONE) ^ ((state >> half_u) & ONE) ^ _nlf_vec(state, positions)
        keys = keys | (kbit << U64(r))
        state = (state >> ONE) | (wanted << top)
    return keys


def random_key(rng: np.random.Generator, params: MiniParams) -> int:
    value = 0
    for shift in range(0, params.key_bits, 32):
        value |= int(rng.integers(0, 1 << 32)) << shift
    return value & params.key_mask


def find_key(params: MiniParams, predicate: Callable[[int], bool], seed: int,
             max_tries: int = 10000) -> int:
    """First key from the (seed, attempt) streams that satisfies the predicate."""
    for attempt in range(max_tries):
        key = random_key(trial_rng(seed, attempt), params)
        if predicate(key):
            logger.debug(f"find_key: accepted attempt {attempt}")
            return key
    raise DomainError(f"no key satisfied the predicate in {max_tries} attempts")


@dataclass(frozen=True, eq=False)
class Codebook:
    """Known (plaintext, ciphertext) pairs, plaintexts distinct and ascending."""
    params: MiniParams
    plaintexts: np.ndarray
    ciphertexts: np.ndarray
    eta: float
    source_key: Optional[int] = None

    def __len__(self) -> int:
        return int(self.plaintexts.shape[0])

    def entries(self) -> Iterator[Tuple[int, int]]:
        for p, c in zip(self.plaintexts.tolist(), self.ciphertexts.tolist()):
            yield p, c


def codebook_size(params: MiniParams, eta: float) -> int:
    if not 0 < eta <= 1:
        raise DomainError("eta must lie in (0, 1]")
    return int(math.floor(eta * (1 << params.width) + 0.5))


def build_codebook(params: MiniParams, key: int, eta: float, seed: int) -> Codebook:
    """round(eta * 2**w) distinct uniformly chosen plaintexts and their ciphertexts."""
    _require_materialisable(params)
    size = codebook_size(params, eta)
    if size < 1:
        raise DomainError("eta is too small to leave any code-book entry")
    domain = 1 << params.width
    if size == domain:
        plaintexts = np.arange(domain, dtype=np.uint64)
    else:
        rng = np.random.default_rng(seed)
        plaintexts = np.sort(rng.choice(domain, size=size, replace=False)).astype(np.uint64)
    ciphertexts = mini_encrypt(plaintexts, key, params)
    return Codebook(params, plaintexts, ciphertexts, float(eta), key)


def save_codebook(path: Union[str, Path], codebook: Codebook) -> None:
    """PCLB file: header then (plaintext, ciphertext) as ceil(w/8)-byte little-endian ints."""
    count = len(codebook)
    width = codebook.params.width
    nbytes = (width + 7) // 8
    pairs = np.empty((count, 2), dtype='<u8')
    pairs[:, 0] = codebook.plaintexts
    pairs[:, 1] = codebook.ciphertexts
    body = pairs.view(np.uint8).reshape(count, 2, 8)[:, :, :nbytes]
    with open(path, 'wb') as f:
        f.write(CODEBOOK_HEADER.pack(CODEBOOK_MAGIC, CODEBOOK_VERSION, width, count))
        f.write(np.ascontiguousarray(body).tobytes())


def load_codebook(path: Union[str, Path], params: Optional[MiniParams] = None) -> Codebook:
    data = Path(path).read_bytes()
    if len(data) < CODEBOOK_HEADER.size:
        raise ConsistencyError("code-book file is shorter than its header")
    magic, version, width, count = CODEBOOK_HEADER.unpack_from(data)
    if magic != CODEBOOK_MAGIC:
        raise ConsistencyError(f"bad code-book magic {magic!r}")
    if version != CODEBOOK_VERSION:
        raise ConsistencyError(f"unsupported code-book version {version}")
    if params is None:
        params = KEELOQ if width == 32 else MiniParams.mini(width)
    elif params.width != width:
        raise ConfigurationError(f"file holds width {width}, parameters say {params.width}")
    nbytes = (width + 7) // 8
    body = np.frombuffer(data, dtype=np.uint8, offset=CODEBOOK_HEADER.size)
    if body.size != count * 2 * nbytes:
        raise ConsistencyError(f"expected {count} entries, file body has {body.size} bytes")
    padded = np.zeros((count, 2, 8), dtype=np.uint8)
    padded[:, :, :nbytes] = body.reshape(count, 2, nbytes)
    pairs = padded.view('<u8').reshape(count, 2).astype(np.uint64)
    if np.unique(pairs[:, 0]).size != count:
        raise ConsistencyError("code-book plaintexts are not distinct")
    order = np.argsort(pairs[:, 0], kind='stable')
    return Codebook(params, pairs[order, 0], pairs[order, 1], count / float(1 << width))


@dataclass
class AttackReport:
    """Outcome of one attack run.

    ``candidates_examined`` counts fixed-point pairs (Bard) or tagged entries
    (matching-property attack) pushed through the residual key search.
    ``fixed_points_found`` is the number of f**8 fixed points seen across all
    subkey guesses (Bard) or the number of hits tagged with the recovered subkey.
    """
    attack: str
    recovered_key: Optional[int]
    candidates_examined: int
    fixed_points_found: int
    matching_property_hits: int
    succeeded: bool
    wall_time: float
    recovered_subkey: Optional[int] = None

    def to_dict(self, include_timing: bool = False) -> Dict[str, object]:
        out = {
            'attack': self.attack,
            'recovered_key': None if self.recovered_key is None else format(self.recovered_key, 'x'),
            'recovered_subkey': self.recovered_subkey,
            'candidates_examined': self.candidates_examined,
            'fixed_points_found': self.fixed_points_found,
            'matching_property_hits': self.matching_property_hits,
            'succeeded': self.succeeded,
        }
        if include_timing:
            out['wall_time'] = self.wall_time
        return out


def _verify_keys(keys: np.ndarray, codebook: Codebook, params: MiniParams, probes: int) -> np.ndarray:
    """Mask of keys that encrypt the first ``probes`` entries correctly."""
    plain = codebook.plaintexts[:probes]
    cipher = codebook.ciphertexts[:probes]
    state = np.broadcast_to(plain, (keys.size, plain.size)).copy()
    out = _forward(state, keys[:, None], params, 0, params.total_rounds)
    return np.all(out == cipher[None, :], axis=1)


def _check_attack_input(codebook: Codebook, params: MiniParams) -> None:
    if len(codebook) == 0:
        raise DomainError("the code-book is empty")
    if params.width > MAX_ATTACK_WIDTH:
        raise DomainError(f"attacks run at width <= {MAX_ATTACK_WIDTH}")


def bard_attack(codebook: Codebook, params: Optional[MiniParams] = None,
                probes: int = DEFAULT_PROBES) -> AttackReport:
    """Fixed-point attack needing two fixed points of f.

    For each g-subkey guess, entries with g^-1(c) = p are fixed points of f**8.
    Each pair of them filters the residual key space by f(p1) = p1 and
    f(p2) = p2; survivors are checked against probe entries. Subkeys are tried
    in increasing order and the first verified key wins.
    """
    params = params or codebook.params
    _check_attack_input(codebook, params)
    started = time.perf_counter()
    plain, cipher = codebook.plaintexts, codebook.ciphertexts
    pairs = fixed_total = 0
    for subkey in range(1 << params.g_rounds):
        peeled = mini_g_invert(cipher, subkey, params)
        points = plain[peeled == plain]
        fixed_total += int(points.size)
        if points.size < 2:
            continue
        keys_for: Dict[int, np.ndarray] = {}
        for p1, p2 in itertools.combinations(points.tolist(), 2):
            pairs += 1
            if p1 not in keys_for:
                keys_for[p1] = fixed_point_keys(p1, subkey, params)
            keys = keys_for[p1]
            probe = _forward(np.full(keys.shape, p2, dtype=np.uint64), keys, params, 0, params.f_rounds)
            survivors = keys[probe == U64(p2)]
            if survivors.size == 0:
                continue
            verified = survivors[_verify_keys(survivors, codebook, params, probes)]
            if verified.size:
                logger.info(f"bard attack: key found at subkey {subkey} after {pairs} pairs")
                return AttackReport('bard', int(verified[0]), pairs, fixed_total, 0, True,
                                    time.perf_counter() - started, subkey)
    return AttackReport('bard', None, pairs, fixed_total, 0, False, time.perf_counter() - started)


@dataclass(frozen=True)
class MatchingHit:
    plaintext: int
    ciphertext: int
    implied_subkey: int


def matching_property_scan(codebook: Codebook, params: Optional[MiniParams] = None) -> List[MatchingHit]:
    """Entries whose ciphertext low half equals the plaintext high half.

    For a fixed point p of f**8, c = g(p) and c_j = p_{w/2+j}. Assuming that,
    each g round inserts the known bit c_{w/2+r}, so the round relation yields
    key bit r directly.
    """
    params = params or codebook.params
    w, half = params.width, params.g_rounds
    low = U64(params.subkey_mask)
    plain, cipher = codebook.plaintexts, codebook.ciphertexts
    mask = (cipher & low) == (plain >> U64(half))
    hit_p, hit_c = plain[mask], cipher[mask]
    state = hit_p.copy()
    subkeys = np.zeros_like(hit_p)
    top, half_u = U64(w - 1), U64(half)
    positions = tuple(w - t for t in params.nlf_taps)
    for r in range(half):
        new = (hit_c >> U64(half + r)) & ONE
        kbit = new ^ (state & ONE) ^ ((state >> half_u) & ONE) ^ _nlf_vec(state, positions)
        subkeys |= kbit << U64(r)
        state = (state >> ONE) | (new << top)
    if not np.array_equal(state, hit_c):
        raise ConsistencyError("implied-subkey derivation did not reproduce the ciphertexts")
    return [MatchingHit(int(p), int(c), int(k)) for p, c, k in zip(hit_p, hit_c, subkeys)]


def cbw_attack(codebook: Codebook, params: Optional[MiniParams] = None,
               probes: int = DEFAULT_PROBES) -> AttackReport:
    """Matching-property attack needing one fixed point of f.

    Hits are processed by descending frequency of their implied subkey (then
    subkey, then plaintext); each one seeds the residual key search with
    f(p) = p and the first verified key wins.
    """
    params = params or codebook.params
    _check_attack_input(codebook, params)
    started = time.perf_counter()
    hits = matching_property_scan(codebook, params)
    freq = Counter(h.implied_subkey for h in hits)
    ordered = sorted(hits, key=lambda h: (-freq[h.implied_subkey], h.implied_subkey, h.plaintext))
    examined = 0
    for hit in ordered:
        examined += 1
        keys = fixed_point_keys(hit.plaintext, hit.implied_subkey, params)
        verified = keys[_verify_keys(keys, codebook, params, probes)]
        if verified.size:
            logger.info(f"cbw attack: key found after {examined} of {len(hits)} hits")
            return AttackReport('cbw', int(verified[0]), examined, freq[hit.implied_subkey], len(hits), True,
                                time.perf_counter() - started, hit.implied_subkey)
    return AttackReport('cbw', None, examined, 0, len(hits), False, time.perf_counter() - started)


ATTACKS = {'bard': bard_attack, 'cbw': cbw_attack}


@dataclass
class AttackTrialSummary:
    attack: str
    params: MiniParams
    eta: float
    seed: int
    trials: int
    successes: int
    predicted: float
    reports: List[AttackReport] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        q = self.predicted
        return math.sqrt(max(q * (1 - q), 0.0) / self.trials)

    def to_dict(self, include_timing: bool = False) -> Dict[str, object]:
        return {
            'attack': self.attack,
            'params': self.params.to_dict(),
            'eta': self.eta,
            'seed': self.seed,
            'trials': self.trials,
            'successes': self.successes,
            'success_rate': self.success_rate,
            'standard_error': self.standard_error,
            'predicted': self.predicted,
            'reports': [r.to_dict(include_timing) for r in self.reports],
        }


def _attack_trial(task) -> AttackReport:
    attack, params, eta, seed, trial, probes = task
    rng = trial_rng(seed, trial)
    key = random_key(rng, params)
    codebook = build_codebook(params, key, eta, int(rng.integers(0, 1 << 32)))
    report = ATTACKS[attack](codebook, params, probes)
    if report.succeeded and report.recovered_key != key:
        report.succeeded = False
    return report


def run_attack_trials(attack: str, params: MiniParams, eta: float, seed: int, key_trials: int,
                      workers: int = 1, probes: int = DEFAULT_PROBES) -> AttackTrialSummary:
    """Attack ``key_trials`` random keys; a trial succeeds when the true key comes back."""
    from costmodel import bard_success, cbw_success
    if attack not in ATTACKS:
        raise ConfigurationError(f"unknown attack {attack!r}; choose from {sorted(ATTACKS)}")
    if key_trials < 1:
        raise DomainError("key_trials must be positive")
    tasks = [(attack, params, eta, seed, t, probes) for t in range(key_trials)]
    logger.info(f"{attack} attack: {key_trials} keys at width {params.width}, eta={eta}")
    if workers > 1 and key_trials > 1:
        with multiprocessing.Pool(workers) as pool:
            reports = pool.map(_attack_trial, tasks)
    else:
        reports = [_attack_trial(t) for t in tasks]
    model = bard_success if attack == 'bard' else cbw_success
    predicted = float(model(eta, 64))
    successes = sum(1 for r in reports if r.succeeded)
    return AttackTrialSummary(attack, params, float(eta), seed, key_trials, successes, predicted, reports)
