#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "fracdrift/mild.hpp"
#include "fracdrift/particles.hpp"

namespace fracdrift {

/// FDFIELD1: "FDFIELD1", u32 d, u32 dtype (1 = f64), u64 n, f64 L, u64 frames,
/// f64 t[frames], then frames row-major f64 fields. Little-endian.
void write_field_trajectory(const std::filesystem::path& path, const FieldTrajectory& u);
FieldTrajectory read_field_trajectory(const std::filesystem::path& path);

/// FDPATH01: "FDPATH01", u64 N, u64 steps, u32 d, u32 dtype (1 = f64), f64 L,
/// f64 t[steps + 1], then particle-major trajectories x[i][k][c].
void write_paths(const std::filesystem::path& path, const ParticleEnsemble& e);
// Weights and mass are not stored; the result has weights +1 and mass 1.
ParticleEnsemble read_paths(const std::filesystem::path& path);

/// Comma-separated table with a header row. Doubles use the shortest
/// round-trip representation, so output is byte-stable.
class CsvTable {
public:
    using Cell = std::variant<double, std::int64_t, std::string>;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<Cell> row);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fracdrift
