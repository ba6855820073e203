#include "incnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "incnet/error.hpp"
#include "incnet/rng.hpp"

namespace incnet {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw TruncatedFileError("unexpected end of file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

void LabeledDataset::push(Tensor input, int label) {
    if (inputs.empty())
        input_shape = input.shape();
    else if (input.shape() != input_shape)
        throw DataError("dataset samples must share one shape");
    inputs.push_back(std::move(input));
    labels.push_back(label);
}

void LabeledDataset::finalize() {
    std::set<int> ids(labels.begin(), labels.end());
    class_ids.assign(ids.begin(), ids.end());
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataError("cannot open IDX image file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("cannot open IDX label file: " + labels_path);

    std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != kIdxImagesMagic)
        throw BadMagicError("bad IDX image magic in " + images_path);
    std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != kIdxLabelsMagic)
        throw BadMagicError("bad IDX label magic in " + labels_path);

    std::uint32_t n_images = read_be32(img, images_path);
    std::uint32_t rows = read_be32(img, images_path);
    std::uint32_t cols = read_be32(img, images_path);
    std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n_images != n_labels)
        throw DataError("IDX image/label count mismatch: " + std::to_string(n_images) + " vs " +
                        std::to_string(n_labels));

    LabeledDataset data;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
        if (!img) throw TruncatedFileError("IDX image file truncated: " + images_path);
        char label;
        lab.read(&label, 1);
        if (!lab) throw TruncatedFileError("IDX label file truncated: " + labels_path);
        Tensor t({1, rows, cols});
        for (std::size_t p = 0; p < pixels.size(); ++p)
            t[p] = static_cast<double>(pixels[p]) / 255.0;
        data.push(std::move(t), static_cast<int>(static_cast<unsigned char>(label)));
    }
    data.finalize();
    return data;
}

void write_idx(const LabeledDataset& data, const std::string& images_path,
               const std::string& labels_path) {
    if (data.input_shape.size() != 3 || data.input_shape[0] != 1)
        throw DataError("write_idx expects [1,H,W] samples");
    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    if (!img) throw DataError("cannot open for writing: " + images_path);
    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    if (!lab) throw DataError("cannot open for writing: " + labels_path);

    write_be32(img, kIdxImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(data.size()));
    write_be32(img, static_cast<std::uint32_t>(data.input_shape[1]));
    write_be32(img, static_cast<std::uint32_t>(data.input_shape[2]));
    write_be32(lab, kIdxLabelsMagic);
    write_be32(lab, static_cast<std::uint32_t>(data.size()));

    std::vector<unsigned char> pixels;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor& t = data.inputs[i];
        pixels.resize(t.size());
        for (std::size_t p = 0; p < t.size(); ++p) {
            double v = std::clamp(t[p], 0.0, 1.0);
            pixels[p] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        img.write(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
        char label = static_cast<char>(data.labels[i]);
        lab.write(&label, 1);
    }
}

LabeledDataset load_csv(const std::string& path, std::size_t label_column,
                        const std::vector<std::size_t>& shape) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);
    std::size_t pixels = shape_product(shape);

    LabeledDataset data;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);

        std::vector<double> values;
        values.reserve(cells.size());
        bool numeric = true;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(c, &used));
                while (used < c.size() && std::isspace(static_cast<unsigned char>(c[used]))) ++used;
                if (used != c.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
        }
        if (!numeric) {
            if (row == 1) continue;  // header
            throw DataError("non-numeric cell at " + path + " row " + std::to_string(row));
        }
        if (values.size() != pixels + 1)
            throw DataError("ragged row at " + path + " row " + std::to_string(row) + ": got " +
                            std::to_string(values.size()) + " cells, expected " +
                            std::to_string(pixels + 1));
        if (label_column >= values.size())
            throw DataError("label column out of range at " + path + " row " + std::to_string(row));

        Tensor t(shape);
        std::size_t p = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i == label_column) continue;
            t[p++] = values[i];
        }
        double lv = values[label_column];
        if (lv != std::floor(lv))
            throw DataError("non-integer label at " + path + " row " + std::to_string(row));
        data.push(std::move(t), static_cast<int>(lv));
    }
    data.finalize();
    return data;
}

void export_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        const Tensor& t = data.inputs[i];
        for (std::size_t p = 0; p < t.size(); ++p) out << ',' << t[p];
        out << '\n';
    }
}

IncrementPlan IncrementPlan::from_sets(std::vector<std::vector<int>> sets) {
    IncrementPlan plan;
    std::set<int> seen;
    for (auto& s : sets) {
        if (s.empty()) throw ConfigError("increment plan contains an empty class set");
        std::sort(s.begin(), s.end());
        for (int c : s)
            if (!seen.insert(c).second)
                throw ConfigError("increment plan class sets must be mutually exclusive (class " +
                                  std::to_string(c) + " repeats)");
        plan.sets.push_back(ClassSet{std::move(s), false});
    }
    if (plan.sets.empty()) throw ConfigError("increment plan must contain at least one set");
    return plan;
}

IncrementPlan IncrementPlan::random(const std::vector<int>& class_ids,
                                    const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    if (total > class_ids.size())
        throw ConfigError("increment plan sizes exceed available classes");
    std::vector<int> shuffled = class_ids;
    Rng rng(derive_seed(seed, "plan"));
    rng.shuffle(shuffled);
    std::vector<std::vector<int>> sets;
    std::size_t at = 0;
    for (auto s : sizes) {
        sets.emplace_back(shuffled.begin() + at, shuffled.begin() + at + s);
        at += s;
    }
    return from_sets(std::move(sets));
}

IncrementStore::IncrementStore(const LabeledDataset& train, const LabeledDataset& test,
                               IncrementPlan plan)
    : plan_(std::move(plan)) {
    std::set<int> available(train.class_ids.begin(), train.class_ids.end());
    for (const auto& s : plan_.sets)
        for (int c : s.classes)
            if (!available.count(c))
                throw DataError("increment plan references class " + std::to_string(c) +
                                " absent from the dataset");

    train_.resize(plan_.sets.size());
    test_.resize(plan_.sets.size());
    std::vector<int> class_to_set(available.empty() ? 0 : *available.rbegin() + 1, -1);
    for (std::size_t s = 0; s < plan_.sets.size(); ++s)
        for (int c : plan_.sets[s].classes) class_to_set[static_cast<std::size_t>(c)] = static_cast<int>(s);

    auto route = [&](const LabeledDataset& src, auto&& sink) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            int label = src.labels[i];
            if (label < 0 || static_cast<std::size_t>(label) >= class_to_set.size()) continue;
            int s = class_to_set[static_cast<std::size_t>(label)];
            if (s >= 0) sink(static_cast<std::size_t>(s), src.inputs[i], label);
        }
    };
    for (auto& t : train_) t.emplace();
    route(train, [&](std::size_t s, const Tensor& x, int y) { train_[s]->push(x, y); });
    route(test, [&](std::size_t s, const Tensor& x, int y) { test_[s].push(x, y); });
    for (auto& t : train_) t->finalize();
    for (auto& t : test_) t.finalize();
}

const std::vector<int>& IncrementStore::classes(std::size_t ordinal) const {
    if (ordinal >= plan_.sets.size()) throw ConfigError("increment ordinal out of range");
    return plan_.sets[ordinal].classes;
}

LabeledDataset IncrementStore::take_train(std::size_t ordinal) {
    if (ordinal >= plan_.sets.size()) throw ConfigError("increment ordinal out of range");
    if (plan_.sets[ordinal].consumed)
        throw DataError("increment " + std::to_string(ordinal) + " already consumed");
    if (ordinal != next_)
        throw DataError("increment " + std::to_string(ordinal) +
                        " requested out of order (next is " + std::to_string(next_) + ")");
    plan_.sets[ordinal].consumed = true;
    access_log_.push_back(ordinal);
    ++next_;
    LabeledDataset out = std::move(*train_[ordinal]);
    train_[ordinal].reset();
    return out;
}

const LabeledDataset& IncrementStore::test(std::size_t ordinal) const {
    if (ordinal >= plan_.sets.size()) throw ConfigError("increment ordinal out of range");
    return test_[ordinal];
}

LabeledDataset IncrementStore::test_union(std::size_t up_to_ordinal) const {
    LabeledDataset all;
    for (std::size_t s = 0; s <= up_to_ordinal && s < test_.size(); ++s)
        for (std::size_t i = 0; i < test_[s].size(); ++i)
            all.push(test_[s].inputs[i], test_[s].labels[i]);
    all.finalize();
    return all;
}

void IncrementStore::mark_consumed_externally(std::size_t ordinal) {
    if (ordinal >= plan_.sets.size()) throw ConfigError("increment ordinal out of range");
    if (ordinal != next_) throw DataError("external consumption must also follow plan order");
    plan_.sets[ordinal].consumed = true;
    train_[ordinal].reset();
    ++next_;
}

std::size_t IncrementStore::train_size(std::size_t ordinal) const {
    if (ordinal >= plan_.sets.size()) throw ConfigError("increment ordinal out of range");
    return train_[ordinal] ? train_[ordinal]->size() : 0;
}

}  // namespace incnet
