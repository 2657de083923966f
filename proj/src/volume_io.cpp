#include "ctxr/volume_io.hpp"

#include "ctxr/error.hpp"
#include "ctxr/rle.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ctxr {

static_assert(std::endian::native == std::endian::little, "volume I/O assumes a little-endian host");

namespace {

constexpr std::size_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiDataOffset = 352;

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<std::uint8_t> read_gzip_file(const fs::path& path)
{
    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes;
    std::array<std::uint8_t, 1 << 16> chunk{};
    for (;;) {
        const int n = gzread(gz, chunk.data(), static_cast<unsigned>(chunk.size()));
        if (n < 0) {
            int errnum = 0;
            std::string msg = gzerror(gz, &errnum);
            gzclose(gz);
            throw Error(ErrorCode::format, "gzip stream error in '" + path.string() + "': " + msg);
        }
        if (n == 0) break;
        bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
    }
    gzclose(gz);
    return bytes;
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

void write_gzip_file(const fs::path& path, const std::vector<std::uint8_t>& bytes)
{
    gzFile gz = gzopen(path.string().c_str(), "wb6");
    if (!gz) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const unsigned n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - offset, 1u << 20));
        if (gzwrite(gz, bytes.data() + offset, n) != static_cast<int>(n)) {
            gzclose(gz);
            throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
        }
        offset += n;
    }
    if (gzclose(gz) != Z_OK) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

template <typename T>
T get(const std::vector<std::uint8_t>& buf, std::size_t offset)
{
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T v)
{
    std::memcpy(buf.data() + offset, &v, sizeof(T));
}

std::size_t bytes_per_voxel(ScalarType t)
{
    switch (t) {
    case ScalarType::uint8: return 1;
    case ScalarType::int16: return 2;
    case ScalarType::float32: return 4;
    }
    return 0;
}

std::int16_t nifti_code(ScalarType t)
{
    switch (t) {
    case ScalarType::uint8: return 2;
    case ScalarType::int16: return 4;
    case ScalarType::float32: return 16;
    }
    return 0;
}

void decode_payload(const std::uint8_t* src, ScalarType type, double slope, double inter, std::vector<float>& out)
{
    const bool identity = slope == 1.0 && inter == 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double raw = 0.0;
        switch (type) {
        case ScalarType::uint8: raw = src[i]; break;
        case ScalarType::int16: {
            std::int16_t v;
            std::memcpy(&v, src + 2 * i, 2);
            raw = v;
            break;
        }
        case ScalarType::float32: {
            float v;
            std::memcpy(&v, src + 4 * i, 4);
            if (identity) {
                out[i] = v;
                continue;
            }
            raw = v;
            break;
        }
        }
        out[i] = static_cast<float>(slope * raw + inter);
    }
}

/// Narrowest type among the preferred one and float32 that stores every value exactly.
ScalarType storage_type(const Volume& v)
{
    auto fits = [&](double lo, double hi) {
        for (float x : v.data)
            if (!(x >= lo && x <= hi) || std::nearbyint(x) != x) return false;
        return true;
    };
    if (v.stored_as == ScalarType::uint8 && fits(0, 255)) return ScalarType::uint8;
    if (v.stored_as != ScalarType::float32 && fits(-32768, 32767)) return ScalarType::int16;
    return ScalarType::float32;
}

std::vector<std::uint8_t> encode_payload(const Volume& v, ScalarType type)
{
    std::vector<std::uint8_t> out(v.data.size() * bytes_per_voxel(type));
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        switch (type) {
        case ScalarType::uint8: out[i] = static_cast<std::uint8_t>(v.data[i]); break;
        case ScalarType::int16: {
            const auto s = static_cast<std::int16_t>(v.data[i]);
            std::memcpy(out.data() + 2 * i, &s, 2);
            break;
        }
        case ScalarType::float32: std::memcpy(out.data() + 4 * i, &v.data[i], 4); break;
        }
    }
    return out;
}

// Maps the 3x3 voxel-to-world rotation/scale (columns = array axes, rows =
// RAS world axes) to axis roles. World +x is patient right, +y anterior, +z
// superior; canonical index directions point to left, posterior, inferior.
Orientation orientation_from_matrix(const std::array<std::array<double, 3>, 3>& m)
{
    Orientation o;
    std::array<bool, 3> used{false, false, false};
    for (int axis = 0; axis < 3; ++axis) {
        int best = -1;
        double best_mag = -1.0;
        for (int w = 0; w < 3; ++w)
            if (!used[w] && std::abs(m[w][axis]) > best_mag) {
                best = w;
                best_mag = std::abs(m[w][axis]);
            }
        used[best] = true;
        o.roles[axis] = static_cast<AxisRole>(best);
        o.flipped[axis] = m[best][axis] > 0.0;
    }
    return o;
}

Orientation nifti_orientation(const std::vector<std::uint8_t>& h)
{
    std::array<std::array<double, 3>, 3> m{};
    const auto sform_code = get<std::int16_t>(h, 254);
    const auto qform_code = get<std::int16_t>(h, 252);
    if (sform_code > 0) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                m[r][c] = get<float>(h, 280 + 16 * r + 4 * c);
    } else if (qform_code > 0) {
        const double b = get<float>(h, 256), c = get<float>(h, 260), d = get<float>(h, 264);
        const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
        const double qfac = get<float>(h, 76) < 0 ? -1.0 : 1.0;
        m = {{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
              {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
              {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}}};
        for (int r = 0; r < 3; ++r) m[r][2] *= qfac;
    } else {
        m = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    }
    return orientation_from_matrix(m);
}

Volume parse_nifti(const std::vector<std::uint8_t>& bytes, const fs::path& path)
{
    const std::string where = " in '" + path.string() + "'";
    if (bytes.size() < kNiftiHeaderSize)
        throw Error(ErrorCode::format, "NIfTI header truncated at byte " + std::to_string(bytes.size()) +
                                           ", expected 348 header bytes" + where);
    const auto sizeof_hdr = get<std::int32_t>(bytes, 0);
    if (sizeof_hdr != 348) {
        if (__builtin_bswap32(static_cast<std::uint32_t>(sizeof_hdr)) == 348u)
            throw Error(ErrorCode::format, "big-endian NIfTI (byte 0) is not supported" + where);
        throw Error(ErrorCode::format, "sizeof_hdr at byte 0 is " + std::to_string(sizeof_hdr) + ", expected 348" + where);
    }
    if (std::memcmp(bytes.data() + 344, "n+1\0", 4) != 0)
        throw Error(ErrorCode::format, "magic at byte 344 is not \"n+1\"" + where);

    const auto ndim = get<std::int16_t>(bytes, 40);
    if (ndim < 1 || ndim > 7)
        throw Error(ErrorCode::format, "dim[0] at byte 40 is " + std::to_string(ndim) + where);
    std::array<std::int64_t, 8> dim{};
    for (int i = 1; i <= 7; ++i) dim[i] = i <= ndim ? get<std::int16_t>(bytes, 40 + 2 * i) : 1;
    for (int i = 1; i <= 3; ++i)
        if (dim[i] < 1)
            throw Error(ErrorCode::format, "dim[" + std::to_string(i) + "] at byte " + std::to_string(40 + 2 * i) +
                                               " is " + std::to_string(dim[i]) + where);
    for (int i = 4; i <= 7; ++i)
        if (dim[i] > 1)
            throw Error(ErrorCode::format, "only 3D volumes are supported; dim[" + std::to_string(i) + "] at byte " +
                                               std::to_string(40 + 2 * i) + " is " + std::to_string(dim[i]) + where);

    const auto code = get<std::int16_t>(bytes, 70);
    ScalarType type;
    switch (code) {
    case 2: type = ScalarType::uint8; break;
    case 4: type = ScalarType::int16; break;
    case 16: type = ScalarType::float32; break;
    default:
        throw Error(ErrorCode::unsupported_datatype, "unsupported NIfTI datatype code " + std::to_string(code) +
                                                         " (supported: 2 uint8, 4 int16, 16 float32)" + where);
    }

    Volume v;
    v.stored_as = type;
    v.grid.dims = Dims3{static_cast<std::size_t>(dim[1]), static_cast<std::size_t>(dim[2]), static_cast<std::size_t>(dim[3])};
    v.grid.spacing = Spacing3{get<float>(bytes, 80), get<float>(bytes, 84), get<float>(bytes, 88)};
    for (int a = 0; a < 3; ++a)
        if (!(v.grid.spacing[a] > 0.0))
            throw Error(ErrorCode::format, "pixdim[" + std::to_string(a + 1) + "] at byte " + std::to_string(80 + 4 * a) +
                                               " is not positive" + where);
    v.grid.orientation = nifti_orientation(bytes);

    const float vox_offset = get<float>(bytes, 108);
    if (!(vox_offset >= static_cast<float>(kNiftiHeaderSize)))
        throw Error(ErrorCode::format, "vox_offset at byte 108 is " + std::to_string(vox_offset) + where);
    const auto offset = static_cast<std::size_t>(vox_offset);
    double slope = get<float>(bytes, 112);
    double inter = get<float>(bytes, 116);
    if (slope == 0.0 || !std::isfinite(slope)) {
        slope = 1.0;
        inter = 0.0;
    }

    const std::size_t expected = v.grid.dims.count() * bytes_per_voxel(type);
    const std::size_t available = bytes.size() > offset ? bytes.size() - offset : 0;
    if (available < expected)
        throw Error(ErrorCode::format, "NIfTI payload truncated: expected " + std::to_string(expected) +
                                           " bytes after offset " + std::to_string(offset) + ", found " +
                                           std::to_string(available) + where);
    v.data.resize(v.grid.dims.count());
    decode_payload(bytes.data() + offset, type, slope, inter, v.data);
    return v;
}

std::vector<std::uint8_t> build_nifti(const Volume& v)
{
    const ScalarType type = storage_type(v);
    std::vector<std::uint8_t> h(kNiftiDataOffset, 0);
    put<std::int32_t>(h, 0, 348);
    put<std::int16_t>(h, 40, 3);
    put<std::int16_t>(h, 42, static_cast<std::int16_t>(v.grid.dims.nx));
    put<std::int16_t>(h, 44, static_cast<std::int16_t>(v.grid.dims.ny));
    put<std::int16_t>(h, 46, static_cast<std::int16_t>(v.grid.dims.nz));
    for (int i = 4; i <= 7; ++i) put<std::int16_t>(h, 40 + 2 * i, 1);
    put<std::int16_t>(h, 70, nifti_code(type));
    put<std::int16_t>(h, 72, static_cast<std::int16_t>(8 * bytes_per_voxel(type)));
    put<float>(h, 76, 1.0f);
    put<float>(h, 80, static_cast<float>(v.grid.spacing.sx));
    put<float>(h, 84, static_cast<float>(v.grid.spacing.sy));
    put<float>(h, 88, static_cast<float>(v.grid.spacing.sz));
    put<float>(h, 108, static_cast<float>(kNiftiDataOffset));
    put<float>(h, 112, 1.0f);
    put<float>(h, 116, 0.0f);
    h[123] = 2; // mm
    put<std::int16_t>(h, 254, 2);
    for (int axis = 0; axis < 3; ++axis) {
        const int world = static_cast<int>(v.grid.orientation.roles[axis]);
        const double sign = v.grid.orientation.flipped[axis] ? 1.0 : -1.0;
        put<float>(h, 280 + 16 * world + 4 * axis, static_cast<float>(sign * v.grid.spacing[axis]));
    }
    std::memcpy(h.data() + 344, "n+1\0", 4);
    const auto payload = encode_payload(v, type);
    h.insert(h.end(), payload.begin(), payload.end());
    return h;
}

json orientation_json(const Orientation& o)
{
    json roles = json::array(), flipped = json::array();
    for (int a = 0; a < 3; ++a) {
        roles.push_back(to_string(o.roles[a]));
        flipped.push_back(o.flipped[a]);
    }
    return json{{"roles", roles}, {"flipped", flipped}};
}

Orientation orientation_from_json(const json& j)
{
    Orientation o;
    for (int a = 0; a < 3; ++a) {
        o.roles[a] = parse_axis_role(j.at("roles").at(a).get<std::string>());
        o.flipped[a] = j.at("flipped").at(a).get<bool>();
    }
    o.validate();
    return o;
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

} // namespace

GridSpec grid_from_json(const json& j)
{
    GridSpec g;
    const auto& d = j.at("dims");
    const auto& s = j.at("spacing");
    g.dims = Dims3{d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(), d.at(2).get<std::size_t>()};
    g.spacing = Spacing3{s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    if (j.contains("orientation")) g.orientation = orientation_from_json(j.at("orientation"));
    g.validate();
    return g;
}

json grid_to_json(const GridSpec& g)
{
    return json{{"dims", {g.dims.nx, g.dims.ny, g.dims.nz}},
                {"spacing", {g.spacing.sx, g.spacing.sy, g.spacing.sz}},
                {"orientation", orientation_json(g.orientation)}};
}

namespace {

Volume load_native(const fs::path& path)
{
    const json header = read_json(path);
    Volume v;
    try {
        if (header.value("format", "") != "ctxr-volume")
            throw Error(ErrorCode::format, "'" + path.string() + "' is not a native volume header");
        v.grid = grid_from_json(header);
        v.stored_as = parse_scalar_type(header.at("dtype").get<std::string>());
        const double slope = header.value("scale", 1.0);
        const double inter = header.value("intercept", 0.0);
        const fs::path raw = path.parent_path() / header.at("raw").get<std::string>();
        const auto bytes = read_file(raw);
        const std::size_t expected = v.grid.dims.count() * bytes_per_voxel(v.stored_as);
        if (bytes.size() != expected)
            throw Error(ErrorCode::format, "raw payload '" + raw.string() + "' holds " + std::to_string(bytes.size()) +
                                               " bytes, expected " + std::to_string(expected));
        v.data.resize(v.grid.dims.count());
        decode_payload(bytes.data(), v.stored_as, slope, inter, v.data);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "malformed native header '" + path.string() + "': " + e.what());
    }
    return v;
}

void save_native(const Volume& v, const fs::path& path)
{
    const ScalarType type = storage_type(v);
    const std::string stem = volume_stem(path);
    json header = grid_to_json(v.grid);
    header["format"] = "ctxr-volume";
    header["version"] = 1;
    header["dtype"] = to_string(type);
    header["raw"] = stem + ".raw";
    write_file(path.parent_path() / (stem + ".raw"), encode_payload(v, type));
    write_text(path, header.dump(2) + "\n");
}

} // namespace

VolumeFormat format_for_path(const fs::path& path)
{
    const std::string name = path.filename().string();
    if (ends_with(name, ".nii.gz")) return VolumeFormat::nifti_gz;
    if (ends_with(name, ".nii")) return VolumeFormat::nifti;
    if (ends_with(name, ".json")) return VolumeFormat::native;
    throw Error(ErrorCode::format, "unrecognized volume extension for '" + path.string() +
                                       "' (expected .nii, .nii.gz or .json)");
}

std::string volume_stem(const fs::path& path)
{
    std::string name = path.filename().string();
    for (const std::string ext : {".labels.json", ".nii.gz", ".nii", ".json"})
        if (ends_with(name, ext)) return name.substr(0, name.size() - ext.size());
    return path.stem().string();
}

fs::path labels_path_for(const fs::path& volume_path)
{
    return volume_path.parent_path() / (volume_stem(volume_path) + ".labels.json");
}

Volume load_volume(const fs::path& path)
{
    switch (format_for_path(path)) {
    case VolumeFormat::nifti: return parse_nifti(read_file(path), path);
    case VolumeFormat::nifti_gz: return parse_nifti(read_gzip_file(path), path);
    case VolumeFormat::native: return load_native(path);
    }
    throw Error(ErrorCode::format, "unreachable");
}

void save_volume(const Volume& volume, const fs::path& path)
{
    volume.validate();
    switch (format_for_path(path)) {
    case VolumeFormat::nifti: write_file(path, build_nifti(volume)); return;
    case VolumeFormat::nifti_gz: write_gzip_file(path, build_nifti(volume)); return;
    case VolumeFormat::native: save_native(volume, path); return;
    }
}

LabelVolume load_labels(const fs::path& path)
{
    const json j = read_json(path);
    try {
        if (j.value("format", "") != "ctxr-labels")
            throw Error(ErrorCode::format, "'" + path.string() + "' is not a label volume");
        LabelVolume labels(grid_from_json(j));
        for (const auto& c : j.at("classes")) {
            LabelMask m;
            m.name = c.at("name").get<std::string>();
            const auto& b = c.at("box");
            m.box = Box3{b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>(), b.at(2).get<std::size_t>(),
                         Dims3{b.at(3).get<std::size_t>(), b.at(4).get<std::size_t>(), b.at(5).get<std::size_t>()}};
            const auto runs = c.at("rle").get<std::vector<std::uint32_t>>();
            if (m.box.dims.count() > 0) m.data = rle_decode(runs, m.box.dims.count());
            labels.add(std::move(m));
        }
        return labels;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "malformed label volume '" + path.string() + "': " + e.what());
    }
}

void save_labels(const LabelVolume& labels, const fs::path& path)
{
    json j = grid_to_json(labels.grid());
    j["format"] = "ctxr-labels";
    j["version"] = 1;
    json classes = json::array();
    for (const auto& c : labels.classes()) {
        const Box3& b = c.box;
        classes.push_back(json{{"name", c.name},
                               {"box", {b.x0, b.y0, b.z0, b.dims.nx, b.dims.ny, b.dims.nz}},
                               {"rle", c.data.empty() ? std::vector<std::uint32_t>{} : rle_encode(c.data)}});
    }
    j["classes"] = std::move(classes);
    write_text(path, j.dump() + "\n");
}

} // namespace ctxr
