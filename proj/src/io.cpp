#include "fracdrift/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "fracdrift/errors.hpp"

namespace fracdrift {

static_assert(std::endian::native == std::endian::little, "containers assume a little-endian host");

namespace {

constexpr std::uint32_t kF64 = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
        if (!out_) throw ConfigError("cannot open '" + path.string() + "' for writing");
    }
    template <class T>
    void put(T v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put(const std::vector<double>& v) {
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    void raw(const char* s, std::size_t n) { out_.write(s, static_cast<std::streamsize>(n)); }
    void close() {
        out_.close();
        if (!out_) throw ConfigError("write failed for '" + path_.string() + "'");
    }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw ConfigError("cannot open '" + path.string() + "'");
    }
    template <class T>
    T get() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        check();
        return v;
    }
    std::vector<double> doubles(std::size_t n) {
        std::vector<double> v(n);
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
        check();
        return v;
    }
    void magic(const char* want) {
        char buf[8];
        in_.read(buf, 8);
        check();
        if (std::memcmp(buf, want, 8) != 0) throw ConfigError("'" + path_.string() + "' is not a " + want + " file");
    }

private:
    void check() {
        if (!in_) throw ConfigError("'" + path_.string() + "' is truncated");
    }
    std::ifstream in_;
    std::filesystem::path path_;
};

}  // namespace

void write_field_trajectory(const std::filesystem::path& path, const FieldTrajectory& u) {
    u.validate();
    Writer w(path);
    w.raw("FDFIELD1", 8);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(u.grid.d));
    w.put<std::uint32_t>(kF64);
    w.put<std::uint64_t>(u.grid.n);
    w.put<double>(u.grid.L);
    w.put<std::uint64_t>(u.frames.size());
    w.put(u.t_grid);
    for (const Field& f : u.frames) w.put(f.values);
    w.close();
}

FieldTrajectory read_field_trajectory(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("FDFIELD1");
    FieldTrajectory u;
    u.grid.d = static_cast<int>(r.get<std::uint32_t>());
    if (r.get<std::uint32_t>() != kF64) throw ConfigError("'" + path.string() + "': unsupported dtype");
    u.grid.n = r.get<std::uint64_t>();
    u.grid.L = r.get<double>();
    u.grid.validate();
    const auto frames = r.get<std::uint64_t>();
    u.t_grid = r.doubles(frames);
    for (std::uint64_t k = 0; k < frames; ++k) u.frames.emplace_back(u.grid, r.doubles(u.grid.size()));
    return u;
}

void write_paths(const std::filesystem::path& path, const ParticleEnsemble& e) {
    Writer w(path);
    w.raw("FDPATH01", 8);
    w.put<std::uint64_t>(e.N);
    w.put<std::uint64_t>(e.frames() == 0 ? 0 : e.frames() - 1);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(e.d));
    w.put<std::uint32_t>(kF64);
    w.put<double>(e.L);
    w.put(e.t_grid);
    std::vector<double> row(e.frames() * e.d);
    for (std::size_t i = 0; i < e.N; ++i) {
        for (std::size_t k = 0; k < e.frames(); ++k)
            for (int c = 0; c < e.d; ++c) row[k * e.d + c] = e.component(k, c)[i];
        w.put(row);
    }
    w.close();
}

ParticleEnsemble read_paths(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("FDPATH01");
    ParticleEnsemble e;
    e.N = r.get<std::uint64_t>();
    const auto steps = r.get<std::uint64_t>();
    e.d = static_cast<int>(r.get<std::uint32_t>());
    if (e.d != 1 && e.d != 2) throw ConfigError("'" + path.string() + "': bad dimension");
    if (r.get<std::uint32_t>() != kF64) throw ConfigError("'" + path.string() + "': unsupported dtype");
    e.L = r.get<double>();
    e.t_grid = r.doubles(steps + 1);
    e.paths.assign(e.t_grid.size() * e.d * e.N, 0.0);
    for (std::size_t i = 0; i < e.N; ++i) {
        const auto row = r.doubles(e.frames() * e.d);
        for (std::size_t k = 0; k < e.frames(); ++k)
            for (int c = 0; c < e.d; ++c) e.component(k, c)[i] = row[k * e.d + c];
    }
    e.weights.assign(e.N, 1.0);
    e.mass = 1.0;
    return e;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void CsvTable::add(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw ParameterError("csv: row width does not match header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::ostringstream out;
    auto line = [&](const auto& cells, auto&& fmt) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << fmt(cells[i]);
        }
        out << '\n';
    };
    line(header_, [](const std::string& s) { return s; });
    for (const auto& row : rows_)
        line(row, [](const Cell& c) {
            if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
            if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
            return std::get<std::string>(c);
        });
    return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

namespace {

std::string digest_hex(EVP_MD_CTX* ctx) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, md.data(), &len) != 1) throw ConfigError("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

using CtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

CtxPtr sha256_ctx() {
    CtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw ConfigError("sha256: init failed");
    return ctx;
}

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
    auto ctx = sha256_ctx();
    EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
    return digest_hex(ctx.get());
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    auto ctx = sha256_ctx();
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return digest_hex(ctx.get());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace fracdrift
