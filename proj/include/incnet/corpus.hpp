#pragma once

#include <cstdint>
#include <string>

#include "incnet/dataset.hpp"

namespace incnet {

// Deterministic synthetic corpora for the desk-scale experiments. Both are
// pure functions of their seed, so regenerated files are byte-identical.
//
// glyphs: 36 classes (digits 0-9 = ids 0-9, letters A-Z = ids 10-35) of
// 28x28 grayscale stroke glyphs under random affine distortion, thickness
// jitter and pixel noise. Written as IDX files.
//
// shapes: 10 classes of 3x16x16 color images (shape + hue per class) over
// noisy backgrounds. Written as CSV (label, 768 pixel columns).

struct GlyphCorpusOptions {
    std::size_t train_per_class = 250;
    std::size_t test_per_class = 60;
    std::uint64_t seed = 1;
};

struct ShapeCorpusOptions {
    std::size_t train_per_class = 300;
    std::size_t test_per_class = 80;
    std::size_t image_hw = 16;
    std::uint64_t seed = 2;
};

LabeledDataset glyph_dataset(bool test_split, const GlyphCorpusOptions& options);
LabeledDataset shape_dataset(bool test_split, const ShapeCorpusOptions& options);

// train-images.idx / train-labels.idx / test-images.idx / test-labels.idx
void generate_glyph_corpus(const std::string& dir, const GlyphCorpusOptions& options);
// train.csv / test.csv
void generate_shape_corpus(const std::string& dir, const ShapeCorpusOptions& options);

}  // namespace incnet
