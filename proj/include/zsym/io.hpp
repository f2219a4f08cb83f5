#pragma once

#include <string>

#include "zsym/grid.hpp"

namespace zsym {

// CSV image format: square row-major grid, one row per line, comma-separated
// decimal floats written at full round-trip precision, preceded by the
// comment header "# m=<int> delta=<float>". Readers accept files without the
// header; when present, its m must match the parsed dimensions.
void write_csv(const std::string& path, const ImageGrid& image, bool header = true);
ImageGrid read_csv(const std::string& path);

// PGM image format: binary P5, 16-bit big-endian samples, maxval 65535. The
// pixel values are a linear map of the stored doubles; the map endpoints and
// grid metadata are recorded in a sidecar JSON file "<path>.json"
// ({"m":..., "delta":..., "vmin":..., "vmax":...}) that read_pgm requires.
// Quantization to 16 bits makes this format lossy.
void write_pgm(const std::string& path, const ImageGrid& image);
ImageGrid read_pgm(const std::string& path);

// Extension dispatch: ".csv" -> CSV, ".pgm" -> PGM (case-insensitive);
// anything else raises io_error.
void write_image(const std::string& path, const ImageGrid& image);
ImageGrid read_image(const std::string& path);

}  // namespace zsym
