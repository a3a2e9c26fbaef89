import numpy as np
import pytest

from sewnet.fontkit import (
    BitmapGlyph,
    MalformedFont,
    builtin_font,
    glyph_for,
    hollow_box,
    parse_bdf,
    scale_glyph,
    serialize_bdf,
)

MINIMAL_BDF = b"""STARTFONT 2.1
FONT testfont
SIZE 8 75 75
FONTBOUNDINGBOX 8 8 0 0
CHARS 1
STARTCHAR A
ENCODING 65
DWIDTH 8 0
BBX 8 8 0 0
BITMAP
18
24
42
42
7E
42
42
00
ENDCHAR
ENDFONT
"""


def glyph(rows_text: str) -> BitmapGlyph:
    rows = np.array([[1 if c == "#" else 0 for c in line]
                     for line in rows_text.split("|")], dtype=np.uint8)
    return BitmapGlyph(codepoint=0x41, width=rows.shape[1],
                       height=rows.shape[0], rows=rows)


class TestParseBdf:
    def test_minimal_single_glyph(self):
        font = parse_bdf(MINIMAL_BDF)
        assert len(font.glyphs) == 1
        g = font.glyphs[0x41]
        assert (g.width, g.height) == (8, 8)
        assert g.rows[0].tolist() == [0, 0, 0, 1, 1, 0, 0, 0]  # 0x18

    def test_full_byte_row_decodes_to_all_ink(self):
        data = MINIMAL_BDF.replace(b"18\n24", b"FF\n24")
        g = parse_bdf(data).glyphs[0x41]
        assert g.rows[0].tolist() == [1] * 8

    def test_narrow_row_msb_first_with_pad_bits_dropped(self):
        data = b"""STARTFONT 2.1
STARTCHAR x
ENCODING 120
BBX 3 3 0 0
BITMAP
80
40
A0
ENDCHAR
ENDFONT
"""
        g = parse_bdf(data).glyphs[120]
        assert g.rows.tolist() == [[1, 0, 0], [0, 1, 0], [1, 0, 1]]

    def test_missing_startfont_reports_line(self):
        with pytest.raises(MalformedFont, match="line 1"):
            parse_bdf(b"FONT nope\nENDFONT\n")

    def test_missing_endfont(self):
        with pytest.raises(MalformedFont, match="ENDFONT"):
            parse_bdf(b"STARTFONT 2.1\nFONT x\n")

    def test_short_bitmap_reports_line(self):
        data = MINIMAL_BDF.replace(b"42\n42\n00\nENDCHAR", b"ENDCHAR")
        with pytest.raises(MalformedFont, match=r"line \d+"):
            parse_bdf(data)

    def test_non_hex_row_rejected(self):
        data = MINIMAL_BDF.replace(b"\n7E\n", b"\nZZ\n")
        with pytest.raises(MalformedFont, match="ZZ"):
            parse_bdf(data)

    def test_wrong_hex_width_rejected(self):
        data = MINIMAL_BDF.replace(b"\n7E\n", b"\n7E0\n")
        with pytest.raises(MalformedFont):
            parse_bdf(data)

    def test_negative_encoding_skipped(self):
        data = MINIMAL_BDF.replace(b"ENCODING 65", b"ENCODING -1")
        assert len(parse_bdf(data).glyphs) == 0

    def test_glyph_without_encoding_rejected(self):
        data = MINIMAL_BDF.replace(b"ENCODING 65\n", b"")
        with pytest.raises(MalformedFont, match="ENCODING"):
            parse_bdf(data)


class TestGlyphLookup:
    def test_present_codepoint(self):
        font = parse_bdf(MINIMAL_BDF)
        assert glyph_for(font, 0x41) is font.glyphs[0x41]

    def test_missing_codepoint_gets_fallback(self):
        font = parse_bdf(MINIMAL_BDF)
        g = glyph_for(font, 0xE123)  # private use, unmapped
        assert g is font.fallback
        assert g.ink_count > 0  # hollow box is visible

    def test_space_is_blank(self):
        g = glyph_for(builtin_font(), ord(" "))
        assert g.ink_count == 0

    def test_lookup_total_over_random_codepoints(self):
        font = builtin_font()
        rng = np.random.default_rng(0)
        for cp in rng.integers(0, 0x10FFFF, size=200):
            assert glyph_for(font, int(cp)) is not None


class TestScaleGlyph:
    def test_identity_side_returns_equal_bitmap(self):
        g = glyph_for(builtin_font(), ord("g"))
        s = scale_glyph(g, 8)
        assert np.array_equal(s.rows, g.rows)

    def test_all_ink_stays_all_ink(self):
        g = glyph("########|" * 7 + "########")
        for side in (1, 2, 3, 4, 7, 16):
            assert scale_glyph(g, side).rows.all()

    def test_all_blank_stays_all_blank(self):
        g = glyph("........|" * 7 + "........")
        for side in range(1, 21):
            assert not scale_glyph(g, side).rows.any()

    def test_upscale_doubling_replicates_pixels(self):
        checker = glyph("|".join("#." * 4 if r % 2 == 0 else ".#" * 4
                                 for r in range(8)))
        up = scale_glyph(checker, 16)
        expected = np.kron(checker.rows, np.ones((2, 2), dtype=np.uint8))
        assert np.array_equal(up.rows, expected)

    def test_nearest_neighbor_pixel_law(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            h = int(rng.integers(1, 12))
            w = int(rng.integers(1, 12))
            rows = rng.integers(0, 2, size=(h, w)).astype(np.uint8)
            g = BitmapGlyph(codepoint=65, width=w, height=h, rows=rows)
            side = int(rng.integers(1, 20))
            s = scale_glyph(g, side)
            assert s.rows.shape == (side, side)
            for r in range(side):
                for c in range(side):
                    assert s.rows[r, c] == rows[r * h // side, c * w // side]


class TestRoundTrip:
    def test_serialize_parse_preserves_bitmaps(self):
        font = builtin_font()
        back = parse_bdf(serialize_bdf(font))
        assert set(back.glyphs) == set(font.glyphs)
        for cp, g in font.glyphs.items():
            assert np.array_equal(back.glyphs[cp].rows, g.rows), chr(cp)

    def test_serialize_parse_twice_is_stable(self):
        once = serialize_bdf(parse_bdf(MINIMAL_BDF))
        twice = serialize_bdf(parse_bdf(once))
        assert once == twice


class TestBuiltinFont:
    def test_covers_printable_ascii(self):
        font = builtin_font()
        for cp in range(0x20, 0x7F):
            assert cp in font.glyphs, chr(cp)

    def test_every_visible_character_has_ink(self):
        font = builtin_font()
        for cp in range(0x21, 0x7F):
            assert font.glyphs[cp].ink_count > 0, chr(cp)

    def test_uniform_8x8_boxes(self):
        font = builtin_font()
        assert font.nominal_size == 8
        for g in font.glyphs.values():
            assert g.rows.shape == (8, 8)

    def test_fallback_is_hollow(self):
        box = hollow_box(8)
        assert box.rows[0].all() and box.rows[-1].all()
        assert not box.rows[1:-1, 1:-1].any()
