#pragma once

#include "gmd/point_cloud.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

namespace gmd {

struct PlyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };

namespace detail {

inline int ply_scalar_size(const std::string& type) {
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
        type == "float" || type == "float32")
        return 4;
    if (type == "double" || type == "float64") return 8;
    return 0;
}

inline double ply_read_scalar(const char* p, const std::string& type) {
    auto load = [&](auto v) {
        std::memcpy(&v, p, sizeof(v));
        return static_cast<double>(v);
    };
    if (type == "float" || type == "float32") return load(float{});
    if (type == "double" || type == "float64") return load(double{});
    if (type == "char" || type == "int8") return load(std::int8_t{});
    if (type == "uchar" || type == "uint8") return load(std::uint8_t{});
    if (type == "short" || type == "int16") return load(std::int16_t{});
    if (type == "ushort" || type == "uint16") return load(std::uint16_t{});
    if (type == "int" || type == "int32") return load(std::int32_t{});
    if (type == "uint" || type == "uint32") return load(std::uint32_t{});
    throw PlyError("ply: unsupported property type '" + type + "'");
}

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

}  // namespace detail

// Reads ASCII or binary-little-endian PLY. Requires x,y,z on the vertex
// element; picks up nx,ny,nz when all three are present. Other properties and
// elements are skipped but still validated against their declared counts.
inline PointCloud load_ply(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw PlyError("ply: cannot open '" + path + "'");

    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> std::string {
        if (!std::getline(file, line)) throw PlyError("ply: unexpected end of header");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        return line;
    };

    if (next_line() != "ply") throw PlyError("ply: missing 'ply' magic on line 1");

    PlyFormat format = PlyFormat::Ascii;
    bool format_seen = false;
    std::vector<detail::PlyElement> elements;

    while (true) {
        std::istringstream ls(next_line());
        std::string keyword;
        ls >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii")
                format = PlyFormat::Ascii;
            else if (fmt == "binary_little_endian")
                format = PlyFormat::BinaryLittleEndian;
            else
                throw PlyError("ply: unsupported format '" + fmt + "' on line " +
                               std::to_string(line_no));
            format_seen = true;
        } else if (keyword == "element") {
            detail::PlyElement e;
            if (!(ls >> e.name >> e.count))
                throw PlyError("ply: malformed element on line " + std::to_string(line_no));
            elements.push_back(e);
        } else if (keyword == "property") {
            if (elements.empty())
                throw PlyError("ply: property before element on line " + std::to_string(line_no));
            detail::PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = type;
                ls >> p.name;
            }
            if (p.name.empty() || detail::ply_scalar_size(p.type) == 0 ||
                (p.is_list && detail::ply_scalar_size(p.count_type) == 0))
                throw PlyError("ply: malformed property on line " + std::to_string(line_no));
            elements.back().properties.push_back(p);
        } else if (keyword == "end_header") {
            break;
        } else {
            throw PlyError("ply: unknown header keyword '" + keyword + "' on line " +
                           std::to_string(line_no));
        }
    }
    if (!format_seen) throw PlyError("ply: header missing format line");

    PointCloud cloud;
    cloud.source_id = std::filesystem::path(path).stem().string();

    for (const auto& elem : elements) {
        const bool is_vertex = elem.name == "vertex";
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
        for (int i = 0; i < static_cast<int>(elem.properties.size()); ++i) {
            const auto& p = elem.properties[i];
            if (p.is_list) continue;
            if (p.name == "x") ix = i;
            if (p.name == "y") iy = i;
            if (p.name == "z") iz = i;
            if (p.name == "nx") inx = i;
            if (p.name == "ny") iny = i;
            if (p.name == "nz") inz = i;
        }
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
            throw PlyError("ply: vertex element lacks x,y,z properties");
        const bool with_normals = is_vertex && inx >= 0 && iny >= 0 && inz >= 0;
        if (is_vertex) cloud.points.reserve(elem.count);

        std::vector<double> row(elem.properties.size(), 0.0);
        for (std::size_t r = 0; r < elem.count; ++r) {
            if (format == PlyFormat::Ascii) {
                if (!std::getline(file, line))
                    throw PlyError("ply: element '" + elem.name + "' declares " +
                                   std::to_string(elem.count) + " rows but file ends after " +
                                   std::to_string(r));
                if (!line.empty() && line.back() == '\r') line.pop_back();
                ++line_no;
                std::istringstream ls(line);
                std::string token;
                // strtod-based so that nan/inf are parsed (and then rejected
                // by the finiteness check) instead of failing the stream
                auto next_value = [&]() {
                    if (!(ls >> token))
                        throw PlyError("ply: malformed row on line " + std::to_string(line_no));
                    char* end = nullptr;
                    const double v = std::strtod(token.c_str(), &end);
                    if (end == token.c_str() || *end != '\0')
                        throw PlyError("ply: malformed value '" + token + "' on line " +
                                       std::to_string(line_no));
                    return v;
                };
                for (std::size_t c = 0; c < elem.properties.size(); ++c) {
                    const auto& p = elem.properties[c];
                    if (p.is_list) {
                        const auto n = static_cast<std::size_t>(next_value());
                        for (std::size_t j = 0; j < n; ++j) next_value();
                    } else {
                        row[c] = next_value();
                    }
                }
            } else {
                for (std::size_t c = 0; c < elem.properties.size(); ++c) {
                    const auto& p = elem.properties[c];
                    char buf[8];
                    if (p.is_list) {
                        const int csz = detail::ply_scalar_size(p.count_type);
                        if (!file.read(buf, csz))
                            throw PlyError("ply: element '" + elem.name +
                                           "' truncated at row " + std::to_string(r));
                        const auto n =
                            static_cast<std::size_t>(detail::ply_read_scalar(buf, p.count_type));
                        if (!file.ignore(static_cast<std::streamsize>(
                                n * detail::ply_scalar_size(p.type))))
                            throw PlyError("ply: element '" + elem.name +
                                           "' truncated at row " + std::to_string(r));
                    } else {
                        const int sz = detail::ply_scalar_size(p.type);
                        if (!file.read(buf, sz))
                            throw PlyError("ply: element '" + elem.name + "' declares " +
                                           std::to_string(elem.count) +
                                           " rows but file ends after " + std::to_string(r));
                        row[c] = detail::ply_read_scalar(buf, p.type);
                    }
                }
            }
            if (is_vertex) {
                Point pt;
                pt.position = Vec3(row[ix], row[iy], row[iz]);
                if (!pt.position.allFinite())
                    throw PlyError("ply: non-finite coordinate at vertex " + std::to_string(r));
                if (with_normals) {
                    pt.normal = Vec3(row[inx], row[iny], row[inz]);
                    if (!pt.normal.allFinite())
                        throw PlyError("ply: non-finite normal at vertex " + std::to_string(r));
                    pt.has_normal = true;
                }
                cloud.points.push_back(pt);
            }
        }
    }
    if (cloud.empty()) throw PlyError("ply: no vertex data in '" + path + "'");
    return cloud;
}

// Writes double-precision vertices; normals are emitted only when every point
// carries one. Binary little-endian by default, so a save/load round trip
// reproduces coordinates bit-exactly.
inline void save_ply(const PointCloud& cloud, const std::string& path,
                     PlyFormat format = PlyFormat::BinaryLittleEndian) {
    if (cloud.empty()) throw std::invalid_argument("save_ply: empty cloud");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw PlyError("ply: cannot write '" + path + "'");
    const bool with_normals = cloud.has_normals();

    file << "ply\n";
    file << (format == PlyFormat::Ascii ? "format ascii 1.0\n"
                                        : "format binary_little_endian 1.0\n");
    file << "element vertex " << cloud.size() << "\n";
    file << "property double x\nproperty double y\nproperty double z\n";
    if (with_normals) file << "property double nx\nproperty double ny\nproperty double nz\n";
    file << "end_header\n";

    if (format == PlyFormat::Ascii) {
        file.precision(std::numeric_limits<double>::max_digits10);
        for (const auto& p : cloud.points) {
            file << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z();
            if (with_normals)
                file << ' ' << p.normal.x() << ' ' << p.normal.y() << ' ' << p.normal.z();
            file << '\n';
        }
    } else {
        auto put = [&](double v) { file.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
        for (const auto& p : cloud.points) {
            put(p.position.x());
            put(p.position.y());
            put(p.position.z());
            if (with_normals) {
                put(p.normal.x());
                put(p.normal.y());
                put(p.normal.z());
            }
        }
    }
    if (!file) throw PlyError("ply: write failed for '" + path + "'");
}

}  // namespace gmd
