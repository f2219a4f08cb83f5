#include "zsym/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace zsym {

namespace {

using nlohmann::json;

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string lower_extension(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

ImageGrid grid_from_rows(const std::vector<std::vector<double>>& rows,
                         const std::string& path) {
    const int m = static_cast<int>(rows.size());
    if (m < 1) throw io_error("'" + path + "' contains no image data");
    ImageGrid image(m);
    for (int j = 0; j < m; ++j) {
        if (static_cast<int>(rows[j].size()) != m)
            throw io_error("'" + path + "' is not square: row " +
                           std::to_string(j + 1) + " has " +
                           std::to_string(rows[j].size()) + " values, expected " +
                           std::to_string(m));
        for (int i = 0; i < m; ++i) image.at(i, j) = rows[j][i];
    }
    return image;
}

}  // namespace

void write_csv(const std::string& path, const ImageGrid& image, bool header) {
    const int m = image.m();
    if (m < 1) throw io_error("cannot write an empty image to '" + path + "'");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    if (header) out << "# m=" << m << " delta=" << format_full(2.0 / m) << "\n";
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (i) out << ",";
            out << format_full(image.at(i, j));
        }
        out << "\n";
    }
    if (!out) throw io_error("failed while writing '" + path + "'");
}

ImageGrid read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int header_m = -1;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (first) {
                int hm = 0;
                double hd = 0.0;
                if (std::sscanf(line.c_str(), "# m=%d delta=%lf", &hm, &hd) == 2)
                    header_m = hm;
            }
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row;
        const char* p = line.c_str();
        while (*p) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw io_error("'" + path + "' line " +
                               std::to_string(rows.size() + 1) +
                               ": expected a number, found '" + std::string(p) + "'");
            row.push_back(v);
            p = end;
            while (*p == ' ' || *p == '\t') ++p;
            if (*p == ',') ++p;
            while (*p == ' ' || *p == '\t') ++p;
        }
        rows.push_back(std::move(row));
    }
    ImageGrid image = grid_from_rows(rows, path);
    if (header_m >= 0 && header_m != image.m())
        throw io_error("'" + path + "' header declares m=" +
                       std::to_string(header_m) + " but the data is " +
                       std::to_string(image.m()) + "x" + std::to_string(image.m()));
    return image;
}

void write_pgm(const std::string& path, const ImageGrid& image) {
    const int m = image.m();
    if (m < 1) throw io_error("cannot write an empty image to '" + path + "'");
    double vmin = image.values().front(), vmax = vmin;
    for (double v : image.values()) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (!std::isfinite(vmin) || !std::isfinite(vmax))
        throw io_error("cannot write '" + path + "': image has non-finite values");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "P5\n" << m << " " << m << "\n65535\n";
    const double span = vmax - vmin;
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(m) * m * 2);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const double t = span > 0.0 ? (image.at(i, j) - vmin) / span : 0.0;
            const auto p = static_cast<std::uint16_t>(
                std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
            bytes.push_back(static_cast<unsigned char>(p >> 8));
            bytes.push_back(static_cast<unsigned char>(p & 0xff));
        }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("failed while writing '" + path + "'");

    json sidecar;
    sidecar["m"] = m;
    sidecar["delta"] = 2.0 / m;
    sidecar["vmin"] = vmin;
    sidecar["vmax"] = vmax;
    std::ofstream side(path + ".json");
    if (!side) throw io_error("cannot open '" + path + ".json' for writing");
    side << sidecar.dump(2) << "\n";
    if (!side) throw io_error("failed while writing '" + path + ".json'");
}

ImageGrid read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read '" + path + "'");
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (!in || magic != "P5")
        throw io_error("'" + path + "' is not a binary P5 PGM file");
    if (width != height)
        throw io_error("'" + path + "' is not square: " + std::to_string(width) +
                       "x" + std::to_string(height));
    if (width < 1) throw io_error("'" + path + "' has an empty raster");
    if (maxval != 65535)
        throw io_error("'" + path + "' must use maxval 65535, found " +
                       std::to_string(maxval));
    in.get();  // single whitespace byte separating header and raster

    const int m = width;
    std::vector<unsigned char> bytes(static_cast<std::size_t>(m) * m * 2);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw io_error("'" + path + "' raster is truncated");

    std::ifstream side(path + ".json");
    if (!side)
        throw io_error("cannot read scale sidecar '" + path +
                       ".json' (required to restore physical values)");
    json sidecar;
    try {
        side >> sidecar;
    } catch (const json::parse_error& e) {
        throw io_error("sidecar '" + path + ".json' is not valid JSON: " + e.what());
    }
    double vmin = 0.0, vmax = 0.0;
    try {
        if (sidecar.at("m").get<int>() != m)
            throw io_error("sidecar '" + path + ".json' declares m=" +
                           std::to_string(sidecar.at("m").get<int>()) +
                           " but the raster is " + std::to_string(m) + "x" +
                           std::to_string(m));
        vmin = sidecar.at("vmin").get<double>();
        vmax = sidecar.at("vmax").get<double>();
    } catch (const json::exception& e) {
        throw io_error("sidecar '" + path + ".json' is missing fields: " + e.what());
    }

    ImageGrid image(m);
    const double span = vmax - vmin;
    std::size_t pos = 0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const int hi = bytes[pos], lo = bytes[pos + 1];
            pos += 2;
            const double t = (hi * 256 + lo) / 65535.0;
            image.at(i, j) = vmin + t * span;
        }
    return image;
}

void write_image(const std::string& path, const ImageGrid& image) {
    const std::string ext = lower_extension(path);
    if (ext == "csv")
        write_csv(path, image);
    else if (ext == "pgm")
        write_pgm(path, image);
    else
        throw io_error("unsupported image extension on '" + path +
                       "' (expected .csv or .pgm)");
}

ImageGrid read_image(const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == "csv") return read_csv(path);
    if (ext == "pgm") return read_pgm(path);
    throw io_error("unsupported image extension on '" + path +
                   "' (expected .csv or .pgm)");
}

}  // namespace zsym
