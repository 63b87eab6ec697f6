// field_io.hpp - binary grid files and CSV export for field maps.
//
// Layout: the magic line "SWFMAP1\n", ASCII "key value" header lines (nx, ny,
// dx_m, f_hz first, optional metadata after), a terminating "end\n", then
// nx * ny little-endian float64 values in row-major order (row j = y index).

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmsurf/solver.hpp"

namespace lmsurf {

inline constexpr std::string_view kGridMagic = "SWFMAP1\n";

struct GridFile {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double f_hz = 0.0;
    std::vector<std::pair<std::string, std::string>> extra;  // metadata in file order
    std::vector<double> values;

    /// Value of an optional header key, or nullptr.
    const std::string* find(std::string_view key) const;
};

std::string encode_grid(const GridFile& grid);
GridFile decode_grid(std::string_view bytes);

std::string encode_fieldmap(const FieldMap& map);
FieldMap decode_fieldmap(std::string_view bytes);

void write_fieldmap(const std::filesystem::path& path, const FieldMap& map);
FieldMap read_fieldmap(const std::filesystem::path& path);

/// x_m,y_m,amplitude rows at cell centers in channel coordinates.
void write_fieldmap_csv(const std::filesystem::path& path, const FieldMap& map,
                        std::size_t max_cells = 2'000'000);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace lmsurf
