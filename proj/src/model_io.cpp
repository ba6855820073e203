#include "incnet/model_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "incnet/error.hpp"
#include "incnet/hash.hpp"

namespace incnet {

namespace {

constexpr char kMagic[4] = {'I', 'N', 'C', 'N'};
constexpr std::uint32_t kSectionManifest = 1;
constexpr std::uint32_t kSectionTensors = 2;

// Little-endian primitive writer/reader over a byte buffer. x86-64 hosts are
// little-endian already; the explicit byte handling keeps the format pinned.
class Writer {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    const std::vector<std::uint8_t>& data() const { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
  public:
    Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const auto* b = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::uint64_t u64() {
        const auto* b = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    const std::uint8_t* take(std::size_t n) {
        if (pos_ + n > n_) throw TruncatedFileError("model file truncated");
        const std::uint8_t* p = p_ + pos_;
        pos_ += n;
        return p;
    }
    std::size_t remaining() const { return n_ - pos_; }

  private:
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const Tensor& t) {
    w.u64(t.rank());
    for (auto e : t.shape()) w.u64(e);
    w.u64(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) w.f64(t[i]);
}

Tensor read_tensor(Reader& r) {
    std::size_t rank = r.u64();
    if (rank > 8) throw TruncatedFileError("implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = r.u64();
    std::size_t count = r.u64();
    if (count != shape_product(shape)) throw TruncatedFileError("tensor payload length mismatch");
    std::vector<double> data(count);
    for (auto& v : data) v = r.f64();
    return Tensor(std::move(shape), std::move(data));
}

void write_layer_params(Writer& w, const LayerParams& p) {
    w.u64(p.size());
    for (const auto& t : p) write_tensor(w, t);
}

LayerParams read_layer_params(Reader& r) {
    std::size_t n = r.u64();
    if (n > 16) throw TruncatedFileError("implausible layer parameter count");
    LayerParams p;
    p.reserve(n);
    for (std::size_t i = 0; i < n; ++i) p.push_back(read_tensor(r));
    return p;
}

void write_spec(Writer& w, const LayerSpec& s) {
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u64(s.in_channels);
    w.u64(s.out_channels);
    w.u64(s.kernel);
    w.u64(s.stride);
    w.u64(s.padding);
    w.u8(static_cast<std::uint8_t>(s.pool_kind));
    w.u64(s.window);
    w.u64(s.fan_in);
    w.u64(s.fan_out);
}

LayerSpec read_spec(Reader& r) {
    LayerSpec s;
    s.kind = static_cast<LayerKind>(r.u8());
    s.in_channels = r.u64();
    s.out_channels = r.u64();
    s.kernel = r.u64();
    s.stride = r.u64();
    s.padding = r.u64();
    s.pool_kind = static_cast<PoolKind>(r.u8());
    s.window = r.u64();
    s.fan_in = r.u64();
    s.fan_out = r.u64();
    return s;
}

void write_class_map(Writer& w, const std::vector<int>& m) {
    w.u64(m.size());
    for (int c : m) w.i64(c);
}

std::vector<int> read_class_map(Reader& r) {
    std::size_t n = r.u64();
    if (n > 1u << 20) throw TruncatedFileError("implausible class map size");
    std::vector<int> m(n);
    for (auto& c : m) c = static_cast<int>(r.i64());
    return m;
}

}  // namespace

void save_model(const IncrementalModel& model, const std::string& path) {
    Writer manifest;
    manifest.u64(model.topology.input_shape.size());
    for (auto e : model.topology.input_shape) manifest.u64(e);
    manifest.u64(model.topology.layers.size());
    for (const auto& s : model.topology.layers) write_spec(manifest, s);
    manifest.u64(model.topology.split_candidates.size());
    for (auto c : model.topology.split_candidates) manifest.u64(c);
    write_class_map(manifest, model.base_class_map);
    manifest.u64(model.base_seed);
    manifest.u8(model.selected ? 1 : 0);
    if (model.selected) {
        manifest.u64(model.selected->split_index);
        manifest.f64(model.selected->shared_fraction);
    }
    manifest.u64(model.branches.size());
    for (const auto& b : model.branches) {
        manifest.u64(b.split_index);
        manifest.u64(b.specs.size());
        for (const auto& s : b.specs) write_spec(manifest, s);
        write_class_map(manifest, b.class_map);
        manifest.u8(b.frozen_prefix ? 1 : 0);
        manifest.u64(b.provenance.increment_ordinal);
        manifest.u64(b.provenance.sharing.split_index);
        manifest.f64(b.provenance.sharing.shared_fraction);
        manifest.u64(b.provenance.seed);
    }

    Writer tensors;
    tensors.u64(model.base_params.size());
    for (const auto& lp : model.base_params) write_layer_params(tensors, lp);
    for (const auto& b : model.branches) {
        if (b.frozen_prefix) {
            write_tensor(tensors, b.frozen_prefix->kernels);
            write_tensor(tensors, b.frozen_prefix->bias);
        }
        tensors.u64(b.params.size());
        for (const auto& lp : b.params) write_layer_params(tensors, lp);
    }

    Writer file;
    file.bytes(kMagic, 4);
    file.u32(kModelFormatVersion);
    file.u32(kSectionManifest);
    file.u64(manifest.data().size());
    file.bytes(manifest.data().data(), manifest.data().size());
    file.u32(kSectionTensors);
    file.u64(tensors.data().size());
    file.bytes(tensors.data().data(), tensors.data().size());
    std::uint32_t crc = Crc32::of(file.data().data(), file.data().size());
    file.u32(crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open model file for writing: " + path);
    out.write(reinterpret_cast<const char*>(file.data().data()),
              static_cast<std::streamsize>(file.data().size()));
    if (!out) throw DataError("failed writing model file: " + path);
}

IncrementalModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 12) throw TruncatedFileError("model file too short: " + path);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw BadMagicError("not a model file (bad magic): " + path);

    std::uint32_t stored_crc = 0;
    for (int i = 3; i >= 0; --i) stored_crc = (stored_crc << 8) | bytes[bytes.size() - 4 + i];
    if (Crc32::of(bytes.data(), bytes.size() - 4) != stored_crc)
        throw ChecksumError("model file checksum mismatch: " + path);

    Reader r(bytes.data(), bytes.size() - 4);
    r.take(4);  // magic
    std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        throw BadVersionError("unsupported model format version " + std::to_string(version));

    if (r.u32() != kSectionManifest) throw TruncatedFileError("manifest section missing");
    std::size_t manifest_len = r.u64();
    Reader m(r.take(manifest_len), manifest_len);

    IncrementalModel model;
    std::size_t in_rank = m.u64();
    std::vector<std::size_t> input_shape(in_rank);
    for (auto& e : input_shape) e = m.u64();
    std::size_t layer_count = m.u64();
    if (layer_count > 1u << 16) throw TruncatedFileError("implausible layer count");
    std::vector<LayerSpec> specs(layer_count);
    for (auto& s : specs) s = read_spec(m);
    std::size_t cand_count = m.u64();
    std::vector<std::size_t> candidates(cand_count);
    for (auto& c : candidates) c = m.u64();
    model.topology = make_topology(std::move(input_shape), std::move(specs), std::move(candidates));
    model.base_class_map = read_class_map(m);
    model.base_seed = m.u64();
    if (m.u8()) {
        SharingConfig sc;
        sc.split_index = m.u64();
        sc.shared_fraction = m.f64();
        double expect = sharing_fraction(model.topology, sc.split_index);
        if (std::abs(expect - sc.shared_fraction) > 1e-12)
            throw ChecksumError("stored sharing fraction does not match topology");
        model.selected = sc;
    }
    std::size_t branch_count = m.u64();
    if (branch_count > 1u << 16) throw TruncatedFileError("implausible branch count");
    std::vector<bool> has_prefix;
    for (std::size_t i = 0; i < branch_count; ++i) {
        BranchModel b;
        b.split_index = m.u64();
        std::size_t nspecs = m.u64();
        if (nspecs > 1u << 16) throw TruncatedFileError("implausible branch spec count");
        b.specs.resize(nspecs);
        for (auto& s : b.specs) s = read_spec(m);
        b.class_map = read_class_map(m);
        has_prefix.push_back(m.u8() != 0);
        b.provenance.increment_ordinal = m.u64();
        b.provenance.sharing.split_index = m.u64();
        b.provenance.sharing.shared_fraction = m.f64();
        b.provenance.seed = m.u64();
        model.branches.push_back(std::move(b));
    }

    if (r.u32() != kSectionTensors) throw TruncatedFileError("tensor section missing");
    std::size_t tensors_len = r.u64();
    Reader t(r.take(tensors_len), tensors_len);
    std::size_t base_layers = t.u64();
    if (base_layers != model.topology.layer_count())
        throw TruncatedFileError("base parameter count does not match topology");
    for (std::size_t i = 0; i < base_layers; ++i)
        model.base_params.push_back(read_layer_params(t));
    for (std::size_t i = 0; i < branch_count; ++i) {
        BranchModel& b = model.branches[i];
        if (has_prefix[i]) {
            FrozenPrefix fp;
            fp.kernels = read_tensor(t);
            fp.bias = read_tensor(t);
            b.frozen_prefix = std::move(fp);
        }
        std::size_t nlp = t.u64();
        if (nlp != b.specs.size())
            throw TruncatedFileError("branch parameter count does not match branch specs");
        for (std::size_t j = 0; j < nlp; ++j) b.params.push_back(read_layer_params(t));
    }
    return model;
}

}  // namespace incnet
