"""Canonical Huffman tables: code generation, lookahead decode tables, encode maps."""

from .image import BadHuffman

LOOKAHEAD = 9


class HuffmanTable:
    """A DHT table built from its 16 code-length counts and symbol list.

    ``lookup[peek]`` packs ``(length << 8) | symbol`` for codes up to
    ``LOOKAHEAD`` bits (0 means "longer code, take the slow path").
    """

    def __init__(self, bits, values):
        bits = tuple(bits)
        values = tuple(values)
        if len(bits) != 16:
            raise BadHuffman("DHT needs 16 length counts")
        if sum(bits) != len(values) or len(values) > 256:
            raise BadHuffman("DHT symbol count mismatch")
        self.bits = bits
        self.values = values

        codes = []
        code = 0
        for length in range(1, 17):
            for _ in range(bits[length - 1]):
                codes.append((code, length))
                code += 1
            # a full code space leaves no room for the next length
            if code > (1 << length):
                raise BadHuffman("over-subscribed Huffman code lengths")
            code <<= 1
        self.codes = codes

        self.lookup = [0] * (1 << LOOKAHEAD)
        # per length: (first code, last code, index of first symbol)
        self.ranges = {}
        for i, ((code, length), sym) in enumerate(zip(codes, values)):
            if length <= LOOKAHEAD:
                shift = LOOKAHEAD - length
                start = code << shift
                packed = (length << 8) | sym
                for j in range(start, start + (1 << shift)):
                    self.lookup[j] = packed
            if length not in self.ranges:
                self.ranges[length] = [code, code, i]
            else:
                self.ranges[length][1] = code
        self.slow = sorted((length, lo, hi, first) for length, (lo, hi, first) in self.ranges.items()
                           if length > LOOKAHEAD)

    def decode_slow(self, acc, nbits):
        """Decode a code longer than LOOKAHEAD bits from the top of ``acc``."""
        for length, lo, hi, first in self.slow:
            if length > nbits:
                break
            code = (acc >> (nbits - length)) & ((1 << length) - 1)
            if lo <= code <= hi:
                return length, self.values[first + code - lo]
        raise BadHuffman("invalid Huffman code prefix")

    def encode_map(self):
        """symbol -> (code, length)."""
        return {sym: cl for cl, sym in zip(self.codes, self.values)}

    def segment_payload(self, table_class, table_id):
        return bytes([(table_class << 4) | table_id, *self.bits, *self.values])
