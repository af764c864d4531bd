// SPDX-License-Identifier: Apache-2.0
#include "evoforge/genome_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "evoforge/error.hpp"

namespace evoforge {

namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'V', 'F', 'G'};

class Writer {
  public:
    void bytes(const std::uint8_t *p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

  private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == in_.size(); }

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1, "u8")); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2, "u16")); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4, "u32")); }
    std::int64_t i64() { return static_cast<std::int64_t>(le(8, "i64")); }
    double f64() { return std::bit_cast<double>(le(8, "f64")); }

    bool boolean(const char *what) {
        std::size_t at = pos_;
        std::uint8_t v = u8();
        if (v > 1) throw ParseError(at, fmt::format("{} flag must be 0 or 1, got {}", what, v));
        return v == 1;
    }

    /// Element count that must fit in the remaining bytes at `min_size` bytes each.
    std::uint32_t count(std::size_t min_size, const char *what) {
        std::size_t at = pos_;
        std::uint32_t n = u32();
        if (static_cast<std::uint64_t>(n) * min_size > in_.size() - pos_)
            throw ParseError(at, fmt::format("{} count {} exceeds remaining stream", what, n));
        return n;
    }

  private:
    std::uint64_t le(int n, const char *what) {
        if (in_.size() - pos_ < static_cast<std::size_t>(n))
            throw ParseError(pos_, fmt::format("truncated stream while reading {}", what));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> serialize(const Genome &g) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u16(kGenomeFormatVersion);
    w.i64(g.generation_id);
    w.u32(static_cast<std::uint32_t>(g.island_of_origin));
    w.u8(g.fitness.has_value() ? 1 : 0);
    w.f64(g.fitness.value_or(0.0));
    w.u8(g.mae.has_value() ? 1 : 0);
    w.f64(g.mae.value_or(0.0));
    w.u8(g.diverged ? 1 : 0);

    w.u32(static_cast<std::uint32_t>(g.nodes.size()));
    for (const auto &n : g.nodes) {
        w.u32(n.innovation);
        w.u8(static_cast<std::uint8_t>(n.type));
        w.f64(n.depth);
        w.u8(n.enabled ? 1 : 0);
        w.u16(static_cast<std::uint16_t>(n.params.size()));
        for (double p : n.params) w.f64(p);
    }
    w.u32(static_cast<std::uint32_t>(g.edges.size()));
    for (const auto &e : g.edges) {
        w.u32(e.innovation);
        w.u32(e.source);
        w.u32(e.target);
        w.f64(e.weight);
        w.u8(e.enabled ? 1 : 0);
    }
    w.u32(static_cast<std::uint32_t>(g.rec_edges.size()));
    for (const auto &e : g.rec_edges) {
        w.u32(e.innovation);
        w.u32(e.source);
        w.u32(e.target);
        w.u16(e.time_skip);
        w.f64(e.weight);
        w.u8(e.enabled ? 1 : 0);
    }
    return w.take();
}

Genome deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError(0, "missing EVFG magic");
    for (int i = 0; i < 4; ++i) r.u8();
    std::size_t version_at = r.offset();
    std::uint16_t version = r.u16();
    if (version != kGenomeFormatVersion) throw ParseError(version_at, fmt::format("unsupported version {}", version));

    Genome g;
    g.generation_id = r.i64();
    g.island_of_origin = static_cast<std::int32_t>(r.u32());
    bool has_fitness = r.boolean("fitness");
    double fitness = r.f64();
    bool has_mae = r.boolean("mae");
    double mae = r.f64();
    if (has_fitness) g.fitness = fitness;
    if (has_mae) g.mae = mae;
    g.diverged = r.boolean("diverged");

    std::uint32_t n_nodes = r.count(16, "node");
    g.nodes.reserve(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
        NodeGene n;
        n.innovation = r.u32();
        std::size_t type_at = r.offset();
        std::uint8_t type = r.u8();
        if (type > static_cast<std::uint8_t>(NodeType::UGRNN))
            throw ParseError(type_at, fmt::format("unknown node type {}", type));
        n.type = static_cast<NodeType>(type);
        n.depth = r.f64();
        n.enabled = r.boolean("node enabled");
        std::size_t len_at = r.offset();
        std::uint16_t len = r.u16();
        if (len != param_count(n.type))
            throw ParseError(len_at, fmt::format("node {} parameter block length {} does not match type {}",
                                                 n.innovation, len, to_string(n.type)));
        n.params.resize(len);
        for (auto &p : n.params) p = r.f64();
        g.nodes.push_back(std::move(n));
    }
    std::uint32_t n_edges = r.count(21, "edge");
    g.edges.reserve(n_edges);
    for (std::uint32_t i = 0; i < n_edges; ++i) {
        EdgeGene e;
        e.innovation = r.u32();
        e.source = r.u32();
        e.target = r.u32();
        e.weight = r.f64();
        e.enabled = r.boolean("edge enabled");
        g.edges.push_back(e);
    }
    std::uint32_t n_rec = r.count(23, "recurrent edge");
    g.rec_edges.reserve(n_rec);
    for (std::uint32_t i = 0; i < n_rec; ++i) {
        RecurrentEdgeGene e;
        e.innovation = r.u32();
        e.source = r.u32();
        e.target = r.u32();
        e.time_skip = r.u16();
        e.weight = r.f64();
        e.enabled = r.boolean("recurrent edge enabled");
        g.rec_edges.push_back(e);
    }
    if (!r.at_end()) throw ParseError(r.offset(), "trailing bytes after recurrent edge table");
    if (std::string problem = g.check_invariants(); !problem.empty()) throw ParseError(r.offset(), problem);
    return g;
}

std::string to_text(const Genome &g) {
    std::string out = "genome {\n";
    out += fmt::format("  generation_id: {}\n  island_of_origin: {}\n", g.generation_id, g.island_of_origin);
    out += g.fitness ? fmt::format("  fitness: {:.17g}\n", *g.fitness) : std::string("  fitness: none\n");
    out += g.mae ? fmt::format("  mae: {:.17g}\n", *g.mae) : std::string("  mae: none\n");
    out += fmt::format("  diverged: {}\n", g.diverged);
    out += "  nodes: [\n";
    for (const auto &n : g.nodes) {
        out += fmt::format("    {{ innovation: {}, type: {}, depth: {:.17g}, enabled: {}, params: [{:.17g}] }}\n",
                           n.innovation, to_string(n.type), n.depth, n.enabled, fmt::join(n.params, ", "));
    }
    out += "  ]\n  edges: [\n";
    for (const auto &e : g.edges) {
        out += fmt::format("    {{ innovation: {}, source: {}, target: {}, weight: {:.17g}, enabled: {} }}\n",
                           e.innovation, e.source, e.target, e.weight, e.enabled);
    }
    out += "  ]\n  rec_edges: [\n";
    for (const auto &e : g.rec_edges) {
        out += fmt::format(
            "    {{ innovation: {}, source: {}, target: {}, time_skip: {}, weight: {:.17g}, enabled: {} }}\n",
            e.innovation, e.source, e.target, e.time_skip, e.weight, e.enabled);
    }
    out += "  ]\n}\n";
    return out;
}

void write_genome_file(const std::filesystem::path &path, const Genome &g) {
    auto bytes = serialize(g);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing " + path.string());
}

Genome read_genome_file(const std::filesystem::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open genome file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::uint64_t genome_digest(const Genome &g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : serialize(g)) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace evoforge
