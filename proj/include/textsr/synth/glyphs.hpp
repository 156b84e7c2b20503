#pragma once

#include <array>
#include <string>
#include <vector>

#include "textsr/core/rng.hpp"
#include "textsr/io/image.hpp"

namespace textsr::synth {

// A glyph template is a set of polylines in the unit square; every stroke
// chain touches the others, so a rendered glyph is one connected component.
struct GlyphTemplate {
    char label;
    std::vector<std::vector<std::array<double, 2>>> strokes;
};

struct GlyphAtlas {
    std::vector<GlyphTemplate> glyphs;
    const GlyphTemplate& find(char c) const;
};

// 26 stroke-based templates, A..Z.
const GlyphAtlas& default_atlas();

// Characters whose templates stay reliably separable under normalized
// cross-correlation at small sizes; dataset synthesis draws from these.
const std::string& default_charset();

struct GlyphStyle {
    int cell_px = 24;          // glyph box edge in pixels
    double thickness = 0.14;   // stroke radius, fraction of the cell
    double max_rotation_deg = 5.0;
    bool vertical = false;     // stack glyphs top-to-bottom instead of a row
    std::array<float, 3> color = {0.1f, 0.1f, 0.1f};
};

struct GlyphPatch {
    Image rgba;                // {4,h,w}, straight (unpremultiplied) color
    Tensor<float> mask;        // {1,h,w}, exactly (alpha > 0.5)
    std::string transcript;
    std::array<int, 4> box{0, 0, 0, 0}; // x,y,w,h in target coords, set at composition
    uint64_t seed = 0;
};

// Renders 1..8 glyphs drawn from the charset with per-glyph jitter. Pure
// function of (seed, charset, style).
GlyphPatch render_glyph_patch(uint64_t seed, const std::string& charset,
                              const GlyphStyle& style);

// Quality filter: long edge divided by glyph count must reach min_ratio px.
bool filter_patch(const GlyphPatch& p, double min_ratio);

// Canonical binary rendering of one template, used for recognition matching.
Tensor<float> render_glyph_template(char c, int size_px, double thickness_frac);

// Replace the patch color in place (alpha and mask untouched).
void recolor_patch(GlyphPatch& p, const std::array<float, 3>& color);

} // namespace textsr::synth
