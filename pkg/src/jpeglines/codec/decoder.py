"""Baseline JPEG parser that stops at quantized DCT coefficients.

Only the first (luminance) component is kept.  Other components are
entropy-decoded to stay in sync with the bitstream and then dropped.
"""

from __future__ import annotations

import struct
from array import array

import numpy as np

from .huffman import LOOKAHEAD, HuffmanTable
from .image import (BadHuffman, BadMarker, CoefficientImage, QuantTable,
                    TruncatedStream, UnsupportedMode)
from .tables import ZIGZAG

SOI, EOI, SOS, DQT, DHT, DRI, SOF0 = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xC0
RST0, RST7 = 0xD0, 0xD7
# SOF1..SOF15 minus DHT (C4), JPG (C8) and DAC (CC)
OTHER_SOF = {m for m in range(0xC1, 0xD0)} - {DHT, 0xC8, 0xCC}
MAX_COEF = 2047

_ZERO_BLOCK = array("h", bytes(128))
_PEEK_MASK = (1 << LOOKAHEAD) - 1


class _Component:
    __slots__ = ("ident", "h", "v", "tq", "td", "ta", "pred")

    def __init__(self, ident, h, v, tq):
        self.ident, self.h, self.v, self.tq = ident, h, v, tq
        self.td = self.ta = 0
        self.pred = 0


class _Frame:
    def __init__(self, width, height, components):
        self.width = width
        self.height = height
        self.components = components
        self.hmax = max(c.h for c in components)
        self.vmax = max(c.v for c in components)

    def comp_blocks(self, comp):
        """(blocks_wide, blocks_high) of the component's own sample grid."""
        w = -(-self.width * comp.h // self.hmax)
        h = -(-self.height * comp.v // self.vmax)
        return -(-w // 8), -(-h // 8)


class _Segments:
    """Cursor over marker segments with bounds-checked reads."""

    def __init__(self, data):
        self.data = data
        self.pos = 0

    def next_marker(self):
        data, pos, n = self.data, self.pos, len(self.data)
        if pos >= n:
            raise TruncatedStream("unexpected end of stream before EOI")
        if data[pos] != 0xFF:
            raise BadMarker(f"expected marker at offset {pos}, found 0x{data[pos]:02x}")
        while pos < n and data[pos] == 0xFF:
            pos += 1
        if pos >= n:
            raise TruncatedStream("stream ends inside a marker")
        self.pos = pos + 1
        return data[pos]

    def segment(self):
        data, pos = self.data, self.pos
        if pos + 2 > len(data):
            raise TruncatedStream("stream ends inside a segment length")
        (length,) = struct.unpack_from(">H", data, pos)
        if length < 2:
            raise BadMarker(f"segment length {length} at offset {pos}")
        end = pos + length
        if end > len(data):
            raise TruncatedStream("segment runs past end of stream")
        self.pos = end
        return data[pos + 2:end]


def _parse_dqt(payload, qtables):
    i = 0
    while i < len(payload):
        pq, tq = payload[i] >> 4, payload[i] & 15
        i += 1
        if pq > 1 or tq > 3:
            raise BadMarker("bad DQT precision/destination")
        size = 64 * (pq + 1)
        if i + size > len(payload):
            raise BadMarker("DQT table runs past segment")
        if pq == 0:
            zz = payload[i:i + 64]
        else:
            zz = struct.unpack_from(">64H", payload, i)
        i += size
        natural = [0] * 64
        for k, v in enumerate(zz):
            natural[ZIGZAG[k]] = v
        if min(natural) < 1:
            raise BadMarker("zero quantizer entry")
        qtables[tq] = QuantTable(tuple(natural))


def _parse_dht(payload, dc_tables, ac_tables):
    i = 0
    while i < len(payload):
        if i + 17 > len(payload):
            raise BadMarker("DHT header runs past segment")
        tc, th = payload[i] >> 4, payload[i] & 15
        if tc > 1 or th > 3:
            raise BadMarker("bad DHT class/destination")
        bits = payload[i + 1:i + 17]
        count = sum(bits)
        i += 17
        if i + count > len(payload):
            raise BadMarker("DHT symbols run past segment")
        table = HuffmanTable(bits, payload[i:i + count])
        i += count
        (ac_tables if tc else dc_tables)[th] = table


def _parse_sof0(payload):
    if len(payload) < 6:
        raise BadMarker("SOF0 too short")
    precision, height, width, ncomp = struct.unpack_from(">BHHB", payload, 0)
    if precision != 8:
        raise UnsupportedMode(f"{precision}-bit samples are not baseline")
    if height == 0:
        raise UnsupportedMode("DNL-defined height is not supported")
    if width == 0 or ncomp == 0 or ncomp > 4:
        raise BadMarker("bad SOF0 geometry")
    if len(payload) != 6 + 3 * ncomp:
        raise BadMarker("SOF0 length does not match component count")
    comps = []
    for k in range(ncomp):
        ident, hv, tq = payload[6 + 3 * k:9 + 3 * k]
        h, v = hv >> 4, hv & 15
        if not (1 <= h <= 4 and 1 <= v <= 4) or tq > 3:
            raise BadMarker("bad component sampling/table")
        comps.append(_Component(ident, h, v, tq))
    return _Frame(width, height, comps)


def _scan_chunks(data, start):
    """Split entropy-coded data at RSTn markers.

    Returns ``(chunks, end)`` where ``end`` is the offset of the marker that
    terminates the scan (or ``len(data)``).  Chunks are byte-unstuffed.
    """
    chunks = []
    seg_start = start
    i = start
    n = len(data)
    while True:
        i = data.find(b"\xff", i)
        if i < 0 or i + 1 >= n:
            chunks.append(data[seg_start:n])
            return [c.replace(b"\xff\x00", b"\xff") for c in chunks], n
        nxt = data[i + 1]
        if nxt == 0x00:
            i += 2
        elif RST0 <= nxt <= RST7:
            chunks.append(data[seg_start:i])
            i += 2
            seg_start = i
        elif nxt == 0xFF:
            # fill byte; the marker proper follows
            i += 1
        else:
            chunks.append(data[seg_start:i])
            return [c.replace(b"\xff\x00", b"\xff") for c in chunks], i


def _blank_pattern(dct, act):
    """(length, code) of the bit string "DC difference 0, then end of block", or (0, 0)."""
    dc = dict(zip(dct.values, dct.codes)).get(0)
    eob = dict(zip(act.values, act.codes)).get(0)
    if dc is None or eob is None:
        return 0, 0
    return dc[1] + eob[1], (dc[0] << eob[1]) | eob[0]


class _Sink:
    """Decoded luminance blocks: every block's DC and grid position, plus dense storage for blocks with AC terms.

    Blocks without AC terms (most of a page's background) cost six bytes.
    """

    def __init__(self):
        self.dc = array("h")
        self.pos = array("i")
        self.dense = array("h")
        self.dense_pos = array("i")


def _decode_slow(table, acc, nbits, past_end):
    """Decode a long code; ``past_end`` is how many padding bytes have been loaded into ``acc``."""
    try:
        length, sym = table.decode_slow(acc, nbits)
    except BadHuffman:
        if past_end * 8 - nbits > -16:
            raise TruncatedStream("scan data ends inside a Huffman code") from None
        raise
    if past_end * 8 - nbits + length > 0:
        raise TruncatedStream("scan data ends inside a Huffman code")
    return length, sym


def _decode_interval(chunk, plan, n_mcus, mcu_start, mcus_per_row, sink):
    """Decode ``n_mcus`` MCUs from one restart interval.

    ``plan`` holds one tuple per block of an MCU:
    ``(component, dc_table, ac_table, dy, dx, keep, comp_v, comp_h, bw, bh, blank_len, blank_code)``
    where ``bw, bh`` bound the kept component's block grid and
    ``blank_len, blank_code`` is the bit string of an all-zero-AC block with
    an unchanged DC, decoded in one step.  Kept blocks go to ``sink``.
    """
    data = chunk
    n = len(data)
    pos = 0
    acc = 0
    nbits = 0
    zz = ZIGZAG
    zero = _ZERO_BLOCK
    sink_dc, sink_pos, dense, dense_pos = sink.dc, sink.pos, sink.dense, sink.dense_pos
    for m in range(mcu_start, mcu_start + n_mcus):
        my, mx = divmod(m, mcus_per_row)
        for comp, dct, act, dy, dx, keep, cv, ch, bw, bh, blank_len, blank_code in plan:
            if keep:
                row = my * cv + dy
                col = mx * ch + dx
                store = row < bh and col < bw
            else:
                store = False
            if nbits < 32:
                acc &= (1 << nbits) - 1
                while nbits < 32:
                    acc = (acc << 8) | (data[pos] if pos < n else 0xFF)
                    pos += 1
                    nbits += 8
            if blank_len and ((acc >> (nbits - blank_len)) & ((1 << blank_len) - 1)) == blank_code:
                nbits -= blank_len
                if (pos - n) * 8 - nbits > 0:
                    raise TruncatedStream("scan data ends mid-block")
                if store:
                    sink_dc.append(comp.pred)
                    sink_pos.append(row * bw + col)
                continue
            # DC
            e = dct.lookup[(acc >> (nbits - LOOKAHEAD)) & _PEEK_MASK]
            if e:
                nbits -= e >> 8
                s = e & 0xFF
            else:
                length, s = _decode_slow(dct, acc, nbits, pos - n)
                nbits -= length
            if s:
                if s > 11:
                    raise BadHuffman(f"DC magnitude category {s}")
                v = (acc >> (nbits - s)) & ((1 << s) - 1)
                nbits -= s
                if v < (1 << (s - 1)):
                    v -= (1 << s) - 1
                comp.pred += v
            dc = comp.pred
            if dc > MAX_COEF or dc < -MAX_COEF:
                raise BadHuffman("DC value out of range")
            if store:
                base = len(dense)
                dense.extend(zero)
            # AC
            k = 1
            has_ac = False
            lookup = act.lookup
            while k < 64:
                if nbits < 32:
                    acc &= (1 << nbits) - 1
                    while nbits < 32:
                        acc = (acc << 8) | (data[pos] if pos < n else 0xFF)
                        pos += 1
                        nbits += 8
                e = lookup[(acc >> (nbits - LOOKAHEAD)) & _PEEK_MASK]
                if e:
                    nbits -= e >> 8
                    rs = e & 0xFF
                else:
                    length, rs = _decode_slow(act, acc, nbits, pos - n)
                    nbits -= length
                s = rs & 15
                if s == 0:
                    if rs == 0:
                        break
                    if rs == 0xF0:
                        k += 16
                        if k > 64:
                            raise BadHuffman("zero run past end of block")
                        continue
                    raise BadHuffman(f"invalid AC symbol 0x{rs:02x}")
                k += rs >> 4
                if k > 63:
                    raise BadHuffman("AC run past end of block")
                if s > 10:
                    raise BadHuffman(f"AC magnitude category {s}")
                v = (acc >> (nbits - s)) & ((1 << s) - 1)
                nbits -= s
                if v < (1 << (s - 1)):
                    v -= (1 << s) - 1
                if store:
                    dense[base + zz[k]] = v
                    has_ac = True
                k += 1
            if (pos - n) * 8 - nbits > 0:
                raise TruncatedStream("scan data ends mid-block")
            if store:
                sink_dc.append(dc)
                sink_pos.append(row * bw + col)
                if has_ac:
                    dense_pos.append(row * bw + col)
                else:
                    del dense[base:]


def parse_jpeg(data: bytes) -> CoefficientImage:
    """Entropy-decode a baseline JPEG and return its luminance coefficients."""
    data = bytes(data)
    if len(data) < 2 or data[0] != 0xFF or data[1] != SOI:
        raise BadMarker("missing SOI marker")
    seg = _Segments(data)
    seg.pos = 2

    qtables = {}
    dc_tables = {}
    ac_tables = {}
    frame = None
    restart_interval = 0
    luma = None  # (sink, bw, bh)

    while True:
        if seg.pos >= len(data) and luma is not None:
            # tolerate a missing EOI once the luminance scan is complete
            break
        marker = seg.next_marker()
        if marker == EOI:
            break
        if marker == SOI or RST0 <= marker <= RST7:
            raise BadMarker(f"unexpected marker 0xff{marker:02x}")
        if marker in OTHER_SOF:
            raise UnsupportedMode(f"SOF marker 0xff{marker:02x} is not baseline sequential")
        if marker == 0xCC:
            raise UnsupportedMode("arithmetic coding is not supported")
        payload = seg.segment()
        if marker == DQT:
            _parse_dqt(payload, qtables)
        elif marker == DHT:
            _parse_dht(payload, dc_tables, ac_tables)
        elif marker == SOF0:
            if frame is not None:
                raise BadMarker("second SOF marker")
            frame = _parse_sof0(payload)
        elif marker == DRI:
            if len(payload) != 2:
                raise BadMarker("DRI length")
            (restart_interval,) = struct.unpack(">H", payload)
        elif marker == SOS:
            if frame is None:
                raise BadMarker("SOS before SOF")
            result = _decode_scan(data, seg, payload, frame, dc_tables, ac_tables, restart_interval)
            if result is not None:
                luma = result
        # APPn, COM and anything else with a length are skipped

    if frame is None or luma is None:
        raise TruncatedStream("no luminance scan in stream")
    sink, bw, bh = luma
    y = frame.components[0]
    if y.tq not in qtables:
        raise BadMarker("luminance quantization table not defined")
    expected = bw * bh
    if len(sink.pos) < expected:
        raise TruncatedStream(f"decoded {len(sink.pos)} of {expected} luminance blocks")
    grid = np.zeros((bh * bw, 64), dtype=np.int16)
    has_ac = np.zeros(bh * bw, dtype=bool)
    dense_pos = np.frombuffer(sink.dense_pos, dtype=np.int32)
    grid[dense_pos] = np.frombuffer(sink.dense, dtype=np.int16).reshape(-1, 64)
    grid[np.frombuffer(sink.pos, dtype=np.int32), 0] = np.frombuffer(sink.dc, dtype=np.int16)
    has_ac[dense_pos] = True
    width = -(-frame.width * y.h // frame.hmax)
    height = -(-frame.height * y.v // frame.vmax)
    return CoefficientImage(width, height, grid.reshape(bh, bw, 64), qtables[y.tq], y.ident,
                            has_ac.reshape(bh, bw))


def _decode_scan(data, seg, payload, frame, dc_tables, ac_tables, restart_interval):
    if len(payload) < 1:
        raise BadMarker("empty SOS")
    ns = payload[0]
    if ns < 1 or ns > 4 or len(payload) != 4 + 2 * ns:
        raise BadMarker("SOS length does not match component count")
    by_id = {c.ident: c for c in frame.components}
    comps = []
    for k in range(ns):
        cid, tables = payload[1 + 2 * k], payload[2 + 2 * k]
        comp = by_id.get(cid)
        if comp is None or comp in comps:
            raise BadMarker(f"SOS references unknown component {cid}")
        comp.td, comp.ta = tables >> 4, tables & 15
        if comp.td not in dc_tables or comp.ta not in ac_tables:
            raise BadHuffman("scan uses an undefined Huffman table")
        comps.append(comp)
    ss, se, ahal = payload[1 + 2 * ns:4 + 2 * ns]
    if ss != 0 or se != 63 or ahal != 0:
        raise UnsupportedMode("spectral selection / successive approximation in a baseline frame")

    luma_comp = frame.components[0]
    bw, bh = frame.comp_blocks(luma_comp)
    if ns == 1:
        comp = comps[0]
        cbw, cbh = frame.comp_blocks(comp)
        mcus_per_row, total = cbw, cbw * cbh
        keep = comp is luma_comp
        plan = [(comp, dc_tables[comp.td], ac_tables[comp.ta], 0, 0, keep, 1, 1, bw, bh)]
    else:
        if sum(c.h * c.v for c in comps) > 10:
            raise BadMarker("MCU exceeds 10 blocks")
        mcus_per_row = -(-frame.width // (8 * frame.hmax))
        mcu_rows = -(-frame.height // (8 * frame.vmax))
        total = mcus_per_row * mcu_rows
        plan = []
        for comp in comps:
            keep = comp is luma_comp
            for dy in range(comp.v):
                for dx in range(comp.h):
                    plan.append((comp, dc_tables[comp.td], ac_tables[comp.ta], dy, dx, keep,
                                 comp.v, comp.h, bw, bh))
    plan = [p + _blank_pattern(p[1], p[2]) for p in plan]
    keep_any = any(p[5] for p in plan)

    start = seg.pos
    chunks, end = _scan_chunks(data, start)
    seg.pos = end
    # every block costs at least two bits; reject absurd geometry before decoding
    blocks_per_mcu = len(plan)
    if total * blocks_per_mcu > 4 * (end - start) + 64:
        raise TruncatedStream("scan data too short for declared frame size")

    sink = _Sink()
    for comp in comps:
        comp.pred = 0
    interval = restart_interval or total
    n_intervals = -(-total // interval)
    if len(chunks) < n_intervals:
        raise TruncatedStream(f"scan has {len(chunks)} of {n_intervals} restart intervals")
    for i in range(n_intervals):
        for comp in comps:
            comp.pred = 0
        count = min(interval, total - i * interval)
        _decode_interval(chunks[i], plan, count, i * interval, mcus_per_row, sink)
    if not keep_any:
        return None
    return sink, bw, bh
