#include "incnet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "incnet/error.hpp"
#include "incnet/rng.hpp"

namespace incnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Seg {
    double x1, y1, x2, y2;
};

// Compact stroke font on a [0,1]^2 grid (y grows downward). Glyphs that
// collide in segment fonts are de-aliased: 0 carries a slash (O does not),
// 1 has a flag while I has serifs, 8 stacks a narrow box on a wide one.
std::vector<Seg> glyph_segments(int cls) {
    switch (cls) {
        case 0:  // 0
            return {{.2, .1, .8, .1}, {.8, .1, .8, .9}, {.8, .9, .2, .9}, {.2, .9, .2, .1},
                    {.65, .3, .35, .7}};
        case 1:  // 1
            return {{.5, .1, .5, .9}, {.35, .28, .5, .1}};
        case 2:
            return {{.2, .1, .8, .1}, {.8, .1, .8, .5}, {.8, .5, .2, .5}, {.2, .5, .2, .9},
                    {.2, .9, .8, .9}};
        case 3:
            return {{.2, .1, .8, .1}, {.8, .1, .8, .5}, {.4, .5, .8, .5}, {.8, .5, .8, .9},
                    {.2, .9, .8, .9}};
        case 4:
            return {{.2, .1, .2, .5}, {.2, .5, .8, .5}, {.65, .1, .65, .9}};
        case 5:
            return {{.8, .1, .2, .1}, {.2, .1, .2, .5}, {.2, .5, .8, .5}, {.8, .5, .8, .9},
                    {.8, .9, .2, .9}};
        case 6:
            return {{.8, .1, .2, .1}, {.2, .1, .2, .9}, {.2, .9, .8, .9}, {.8, .9, .8, .5},
                    {.8, .5, .2, .5}};
        case 7:
            return {{.2, .1, .8, .1}, {.8, .1, .4, .9}};
        case 8:  // narrow top box over wide bottom box
            return {{.3, .1, .7, .1}, {.7, .1, .7, .5}, {.7, .5, .3, .5}, {.3, .5, .3, .1},
                    {.25, .5, .75, .5}, {.75, .5, .75, .9}, {.75, .9, .25, .9}, {.25, .9, .25, .5}};
        case 9:
            return {{.8, .5, .2, .5}, {.2, .5, .2, .1}, {.2, .1, .8, .1}, {.8, .1, .8, .9}};
        case 10:  // A
            return {{.2, .9, .5, .1}, {.5, .1, .8, .9}, {.33, .58, .67, .58}};
        case 11:  // B
            return {{.2, .1, .2, .9}, {.2, .1, .7, .1}, {.7, .1, .7, .5}, {.2, .5, .7, .5},
                    {.7, .5, .7, .9}, {.2, .9, .7, .9}};
        case 12:  // C
            return {{.8, .1, .2, .1}, {.2, .1, .2, .9}, {.2, .9, .8, .9}};
        case 13:  // D
            return {{.25, .1, .25, .9}, {.25, .1, .6, .1}, {.6, .1, .8, .3}, {.8, .3, .8, .7},
                    {.8, .7, .6, .9}, {.6, .9, .25, .9}};
        case 14:  // E
            return {{.8, .1, .2, .1}, {.2, .1, .2, .9}, {.2, .9, .8, .9}, {.2, .5, .65, .5}};
        case 15:  // F
            return {{.8, .1, .2, .1}, {.2, .1, .2, .9}, {.2, .5, .65, .5}};
        case 16:  // G
            return {{.8, .1, .2, .1}, {.2, .1, .2, .9}, {.2, .9, .8, .9}, {.8, .9, .8, .55},
                    {.8, .55, .5, .55}};
        case 17:  // H
            return {{.2, .1, .2, .9}, {.8, .1, .8, .9}, {.2, .5, .8, .5}};
        case 18:  // I (serifs)
            return {{.5, .1, .5, .9}, {.3, .1, .7, .1}, {.3, .9, .7, .9}};
        case 19:  // J
            return {{.35, .1, .8, .1}, {.62, .1, .62, .72}, {.62, .72, .47, .9}, {.47, .9, .25, .82}};
        case 20:  // K
            return {{.2, .1, .2, .9}, {.8, .1, .2, .5}, {.2, .5, .8, .9}};
        case 21:  // L
            return {{.2, .1, .2, .9}, {.2, .9, .8, .9}};
        case 22:  // M
            return {{.2, .9, .2, .1}, {.2, .1, .5, .5}, {.5, .5, .8, .1}, {.8, .1, .8, .9}};
        case 23:  // N
            return {{.2, .9, .2, .1}, {.2, .1, .8, .9}, {.8, .9, .8, .1}};
        case 24:  // O (plain box)
            return {{.2, .1, .8, .1}, {.8, .1, .8, .9}, {.8, .9, .2, .9}, {.2, .9, .2, .1}};
        case 25:  // P
            return {{.2, .9, .2, .1}, {.2, .1, .75, .1}, {.75, .1, .75, .5}, {.75, .5, .2, .5}};
        case 26:  // Q
            return {{.2, .1, .8, .1}, {.8, .1, .8, .9}, {.8, .9, .2, .9}, {.2, .9, .2, .1},
                    {.6, .65, .9, .95}};
        case 27:  // R
            return {{.2, .9, .2, .1}, {.2, .1, .75, .1}, {.75, .1, .75, .5}, {.75, .5, .2, .5},
                    {.45, .5, .8, .9}};
        case 28:  // S (slanted waist)
            return {{.8, .1, .2, .1}, {.2, .1, .2, .45}, {.2, .45, .8, .55}, {.8, .55, .8, .9},
                    {.8, .9, .2, .9}};
        case 29:  // T
            return {{.2, .1, .8, .1}, {.5, .1, .5, .9}};
        case 30:  // U
            return {{.2, .1, .2, .9}, {.2, .9, .8, .9}, {.8, .9, .8, .1}};
        case 31:  // V
            return {{.2, .1, .5, .9}, {.5, .9, .8, .1}};
        case 32:  // W
            return {{.2, .1, .35, .9}, {.35, .9, .5, .4}, {.5, .4, .65, .9}, {.65, .9, .8, .1}};
        case 33:  // X
            return {{.2, .1, .8, .9}, {.8, .1, .2, .9}};
        case 34:  // Y
            return {{.2, .1, .5, .5}, {.8, .1, .5, .5}, {.5, .5, .5, .9}};
        case 35:  // Z
            return {{.2, .1, .8, .1}, {.8, .1, .2, .9}, {.2, .9, .8, .9}};
    }
    throw ConfigError("glyph class out of range");
}

double seg_distance(double px, double py, const Seg& s) {
    double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - s.x1) * dx + (py - s.y1) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double qx = s.x1 + t * dx, qy = s.y1 + t * dy;
    return std::sqrt((px - qx) * (px - qx) + (py - qy) * (py - qy));
}

Tensor render_glyph(int cls, Rng& rng) {
    auto segs = glyph_segments(cls);

    double theta = rng.uniform(-0.3, 0.3);
    double sx = rng.uniform(0.85, 1.15);
    double sy = rng.uniform(0.85, 1.15);
    double shear = rng.uniform(-0.18, 0.18);
    double tx = rng.uniform(-0.09, 0.09);
    double ty = rng.uniform(-0.09, 0.09);
    double ct = std::cos(theta), st = std::sin(theta);
    auto warp = [&](double& x, double& y) {
        double ux = (x - 0.5) * sx, uy = (y - 0.5) * sy;
        ux += shear * uy;
        double rx = ct * ux - st * uy, ry = st * ux + ct * uy;
        x = 0.5 + rx + tx;
        y = 0.5 + ry + ty;
    };
    for (auto& s : segs) {
        warp(s.x1, s.y1);
        warp(s.x2, s.y2);
    }

    double halfwidth = rng.uniform(0.03, 0.06);
    double edge = 0.035;
    double brightness = rng.uniform(0.7, 1.0);

    Tensor img({1, 28, 28});
    for (std::size_t r = 0; r < 28; ++r) {
        for (std::size_t c = 0; c < 28; ++c) {
            double px = (static_cast<double>(c) + 0.5) / 28.0;
            double py = (static_cast<double>(r) + 0.5) / 28.0;
            double d = 1e9;
            for (const auto& s : segs) d = std::min(d, seg_distance(px, py, s));
            double ink = 0.0;
            if (d <= halfwidth)
                ink = 1.0;
            else if (d < halfwidth + edge)
                ink = 1.0 - (d - halfwidth) / edge;
            double v = ink * brightness + rng.normal(0.0, 0.07);
            img.at3(0, r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
    h = h - std::floor(h);
    double i = std::floor(h * 6.0);
    double f = h * 6.0 - i;
    double p = v * (1.0 - s), q = v * (1.0 - f * s), t = v * (1.0 - (1.0 - f) * s);
    switch (static_cast<int>(i) % 6) {
        case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
        case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
        case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
        case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
        case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
        default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
    }
}

double soft_edge(double signed_inside, double edge) {
    if (signed_inside >= edge) return 1.0;
    if (signed_inside <= -edge) return 0.0;
    return 0.5 + 0.5 * signed_inside / edge;
}

Tensor render_shape(int cls, std::size_t hw, Rng& rng) {
    double cx = 0.5 + rng.uniform(-0.13, 0.13);
    double cy = 0.5 + rng.uniform(-0.13, 0.13);
    double radius = rng.uniform(0.2, 0.36);
    double rot = rng.uniform(0.0, 2.0 * kPi);
    // color is a per-sample nuisance, never a class cue: every class lives on
    // the same input manifold and only the geometry separates them
    double hue = rng.uniform(0.0, 1.0);
    double sat = rng.uniform(0.55, 1.0);
    double val = rng.uniform(0.6, 1.0);
    double fg[3];
    hsv_to_rgb(hue, sat, val, fg);
    double bg_level = rng.uniform(0.05, 0.25);
    double edge = 0.06;

    auto mask_at = [&](double x, double y) -> double {
        double dx = x - cx, dy = y - cy;
        double rx = std::cos(rot) * dx + std::sin(rot) * dy;
        double ry = -std::sin(rot) * dx + std::cos(rot) * dy;
        double d = std::sqrt(dx * dx + dy * dy);
        switch (cls) {
            case 0:  // disc
                return soft_edge(radius - d, edge);
            case 1:  // square
                return soft_edge(radius * 0.85 - std::max(std::abs(rx), std::abs(ry)), edge);
            case 2: {  // triangle (soft half-planes)
                double m = 1.0;
                for (int k = 0; k < 3; ++k) {
                    double a = rot + kPi / 2.0 + 2.0 * kPi * k / 3.0;
                    double nx = std::cos(a), ny = std::sin(a);
                    m = std::min(m, soft_edge(radius * 0.5 - (dx * nx + dy * ny), edge));
                }
                return m;
            }
            case 3: {  // five-point star (angular radius modulation)
                double ang = std::atan2(dy, dx) - rot;
                double lobe = 0.55 + 0.45 * std::cos(5.0 * ang);
                return soft_edge(radius * (0.45 + 0.55 * lobe) - d, edge);
            }
            case 4:  // ring
                return soft_edge(radius - d, edge) * soft_edge(d - radius * 0.5, edge);
            case 5: {  // cross
                double arm = radius * 0.32;
                double in_h = std::min(soft_edge(arm - std::abs(ry), edge),
                                       soft_edge(radius - std::abs(rx), edge));
                double in_v = std::min(soft_edge(arm - std::abs(rx), edge),
                                       soft_edge(radius - std::abs(ry), edge));
                return std::max(in_h, in_v);
            }
            case 6: {  // thick bar
                double in_len = soft_edge(radius - std::abs(rx), edge);
                double in_wid = soft_edge(radius * 0.35 - std::abs(ry), edge);
                return std::min(in_len, in_wid);
            }
            case 7: {  // two discs
                double d1 = std::hypot(rx - radius * 0.55, ry);
                double d2 = std::hypot(rx + radius * 0.55, ry);
                return std::max(soft_edge(radius * 0.45 - d1, edge),
                                soft_edge(radius * 0.45 - d2, edge));
            }
            case 8: {  // square ring
                double box = std::max(std::abs(rx), std::abs(ry));
                return std::min(soft_edge(radius * 0.85 - box, edge),
                                soft_edge(box - radius * 0.45, edge));
            }
            default: {  // radial gradient blob
                double g = 1.0 - std::min(1.0, d / (radius * 2.2));
                return g * g;
            }
        }
    };

    Tensor img({3, hw, hw});
    for (std::size_t r = 0; r < hw; ++r) {
        for (std::size_t c = 0; c < hw; ++c) {
            double x = (static_cast<double>(c) + 0.5) / static_cast<double>(hw);
            double y = (static_cast<double>(r) + 0.5) / static_cast<double>(hw);
            double m = mask_at(x, y);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                double bg = bg_level + rng.normal(0.0, 0.05);
                double v = m * fg[ch] + (1.0 - m) * bg + rng.normal(0.0, 0.05);
                img.at3(ch, r, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

LabeledDataset build_dataset(bool test_split, std::size_t classes, std::size_t per_class,
                             std::uint64_t seed, const char* tag,
                             Tensor (*render)(int, std::size_t, Rng&), std::size_t hw) {
    LabeledDataset data;
    for (std::size_t cls = 0; cls < classes; ++cls) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::string key = std::string(tag) + (test_split ? "/test/" : "/train/") +
                              std::to_string(cls) + "/" + std::to_string(i);
            Rng rng(derive_seed(seed, key));
            data.push(render(static_cast<int>(cls), hw, rng), static_cast<int>(cls));
        }
    }
    data.finalize();
    return data;
}

Tensor render_glyph_adapter(int cls, std::size_t, Rng& rng) { return render_glyph(cls, rng); }

// round pixels to the 1/255 grid so the CSV and IDX corpora match exactly
void quantize(LabeledDataset& data) {
    for (auto& t : data.inputs)
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = std::round(t[i] * 255.0) / 255.0;
}

}  // namespace

LabeledDataset glyph_dataset(bool test_split, const GlyphCorpusOptions& options) {
    LabeledDataset d = build_dataset(test_split, 36,
                                     test_split ? options.test_per_class : options.train_per_class,
                                     options.seed, "glyphs", render_glyph_adapter, 28);
    quantize(d);
    return d;
}

LabeledDataset shape_dataset(bool test_split, const ShapeCorpusOptions& options) {
    LabeledDataset d = build_dataset(test_split, 10,
                                     test_split ? options.test_per_class : options.train_per_class,
                                     options.seed, "shapes", render_shape, options.image_hw);
    quantize(d);
    return d;
}

void generate_glyph_corpus(const std::string& dir, const GlyphCorpusOptions& options) {
    LabeledDataset train = glyph_dataset(false, options);
    LabeledDataset test = glyph_dataset(true, options);
    write_idx(train, dir + "/train-images.idx", dir + "/train-labels.idx");
    write_idx(test, dir + "/test-images.idx", dir + "/test-labels.idx");
}

void generate_shape_corpus(const std::string& dir, const ShapeCorpusOptions& options) {
    LabeledDataset train = shape_dataset(false, options);
    LabeledDataset test = shape_dataset(true, options);
    export_csv(train, dir + "/train.csv");
    export_csv(test, dir + "/test.csv");
}

}  // namespace incnet
