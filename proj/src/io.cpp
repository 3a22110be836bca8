#include "pointsil/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pointsil::io
{

namespace
{

using nlohmann::json;

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = {})
{
    std::ofstream out(path, mode | std::ios::out | std::ios::trunc);
    if (!out)
    {
        throw Error("cannot write '" + path.string() + "'");
    }
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = {})
{
    std::ifstream in(path, mode | std::ios::in);
    if (!in)
    {
        throw Error("cannot open '" + path.string() + "'");
    }
    return in;
}

std::string at_line(const fs::path& path, std::size_t line)
{
    return path.string() + ":" + std::to_string(line);
}

bool parse_double(const std::string& token, double& out)
{
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end != token.c_str() && *end == '\0';
}

std::string strip_comment(const std::string& line)
{
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

void check_finite_points(const PointCloud& pc, const fs::path& path)
{
    for (Index i = 0; i < pc.rows(); ++i)
    {
        if (!pc.row(i).allFinite())
        {
            throw ParseError(path.string() + ": point " + std::to_string(i),
                             "coordinate is not finite");
        }
    }
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

//------------------------------------------------------------------------------
// Point clouds
//------------------------------------------------------------------------------

void save_xyz(const fs::path& path, const PointCloud& pc)
{
    std::ofstream out = open_out(path);
    for (Index i = 0; i < pc.rows(); ++i)
    {
        out << format_double(pc(i, 0)) << ' ' << format_double(pc(i, 1)) << ' '
            << format_double(pc(i, 2)) << '\n';
    }
}

PointCloud load_xyz(const fs::path& path)
{
    std::ifstream in = open_in(path);
    std::vector<double> coords;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno)
    {
        std::istringstream fields(strip_comment(line));
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;)
        {
            tokens.push_back(tok);
        }
        if (tokens.empty())
        {
            continue;
        }
        if (tokens.size() != 3)
        {
            throw ParseError(at_line(path, lineno),
                             "expected 3 coordinates, found " +
                                 std::to_string(tokens.size()));
        }
        for (const auto& tok : tokens)
        {
            double v = 0;
            if (!parse_double(tok, v) || !std::isfinite(v))
            {
                throw ParseError(at_line(path, lineno),
                                 "'" + tok + "' is not a finite number");
            }
            coords.push_back(v);
        }
    }
    const auto n = static_cast<Index>(coords.size() / 3);
    PointCloud pc(n, 3);
    for (Index i = 0; i < n; ++i)
    {
        for (Index a = 0; a < 3; ++a)
        {
            pc(i, a) = coords[static_cast<std::size_t>(3 * i + a)];
        }
    }
    return pc;
}

void save_ply(const fs::path& path, const PointCloud& pc)
{
    std::ofstream out = open_out(path);
    out << "ply\nformat ascii 1.0\nelement vertex " << pc.rows()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
           "end_header\n";
    for (Index i = 0; i < pc.rows(); ++i)
    {
        out << format_double(pc(i, 0)) << ' ' << format_double(pc(i, 1)) << ' '
            << format_double(pc(i, 2)) << '\n';
    }
}

PointCloud load_ply(const fs::path& path)
{
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        ++lineno;
        return static_cast<bool>(std::getline(in, line));
    };
    if (!next_line() || line != "ply")
    {
        throw ParseError(at_line(path, 1), "missing 'ply' magic");
    }

    Index n_vertices = -1;
    std::vector<std::string> properties;
    bool in_vertex = false;
    while (true)
    {
        if (!next_line())
        {
            throw ParseError(at_line(path, lineno), "header has no end_header");
        }
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "end_header")
        {
            break;
        }
        if (key == "format")
        {
            std::string kind;
            ss >> kind;
            if (kind != "ascii")
            {
                throw ParseError(at_line(path, lineno),
                                 "only ascii PLY is supported");
            }
        }
        else if (key == "element")
        {
            std::string name;
            long long count = -1;
            ss >> name >> count;
            in_vertex = name == "vertex";
            if (in_vertex)
            {
                if (count < 0)
                {
                    throw ParseError(at_line(path, lineno), "bad vertex count");
                }
                n_vertices = static_cast<Index>(count);
            }
            else if (count != 0)
            {
                throw ParseError(at_line(path, lineno),
                                 "element '" + name + "' is not supported");
            }
        }
        else if (key == "property" && in_vertex)
        {
            std::string type, name;
            ss >> type >> name;
            if (type == "list")
            {
                throw ParseError(at_line(path, lineno),
                                 "list properties are not supported on vertices");
            }
            properties.push_back(name);
        }
    }
    if (n_vertices < 0)
    {
        throw ParseError(path.string(), "no vertex element");
    }
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < properties.size(); ++k)
    {
        if (properties[k] == "x") ix = static_cast<int>(k);
        if (properties[k] == "y") iy = static_cast<int>(k);
        if (properties[k] == "z") iz = static_cast<int>(k);
    }
    if (ix < 0 || iy < 0 || iz < 0)
    {
        throw ParseError(path.string(), "vertex element lacks x, y or z");
    }

    PointCloud pc(n_vertices, 3);
    for (Index i = 0; i < n_vertices; ++i)
    {
        if (!next_line())
        {
            throw ParseError(at_line(path, lineno),
                             "expected " + std::to_string(n_vertices) +
                                 " vertices, file ended early");
        }
        std::istringstream ss(line);
        std::vector<double> values;
        for (std::string tok; ss >> tok;)
        {
            double v = 0;
            if (!parse_double(tok, v))
            {
                throw ParseError(at_line(path, lineno),
                                 "'" + tok + "' is not a number");
            }
            values.push_back(v);
        }
        if (values.size() != properties.size())
        {
            throw ParseError(at_line(path, lineno), "wrong number of properties");
        }
        pc.row(i) << values[static_cast<std::size_t>(ix)],
            values[static_cast<std::size_t>(iy)], values[static_cast<std::size_t>(iz)];
    }
    check_finite_points(pc, path);
    return pc;
}

PointCloud load_cloud(const fs::path& path)
{
    return path.extension() == ".ply" ? load_ply(path) : load_xyz(path);
}

void save_cloud(const fs::path& path, const PointCloud& pc)
{
    if (path.extension() == ".ply")
    {
        save_ply(path, pc);
    }
    else
    {
        save_xyz(path, pc);
    }
}

//------------------------------------------------------------------------------
// Masks
//------------------------------------------------------------------------------

void save_pgm(const fs::path& path, const Mask& mask, int maxval)
{
    if (maxval != 255 && maxval != 65535)
    {
        throw InvalidArgument("PGM maxval must be 255 or 65535");
    }
    check_mask(mask);
    std::ofstream out = open_out(path, std::ios::binary);
    out << "P5\n" << mask.cols() << ' ' << mask.rows() << '\n' << maxval << '\n';
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(mask.size()) * (maxval > 255 ? 2 : 1));
    for (Index r = 0; r < mask.rows(); ++r)
    {
        for (Index c = 0; c < mask.cols(); ++c)
        {
            const auto q = static_cast<unsigned>(std::lround(mask(r, c) * maxval));
            if (maxval > 255)
            {
                bytes.push_back(static_cast<char>((q >> 8) & 0xff));
            }
            bytes.push_back(static_cast<char>(q & 0xff));
        }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Mask load_pgm(const fs::path& path)
{
    const std::string data = read_file(path);
    std::size_t pos = 0;
    const std::string where = path.string();

    auto skip_space = [&]() {
        while (pos < data.size())
        {
            if (data[pos] == '#')
            {
                while (pos < data.size() && data[pos] != '\n')
                {
                    ++pos;
                }
            }
            else if (std::isspace(static_cast<unsigned char>(data[pos])))
            {
                ++pos;
            }
            else
            {
                break;
            }
        }
    };
    auto read_int = [&](const char* field) {
        skip_space();
        long long v = 0;
        const std::size_t begin = pos;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos])))
        {
            v = v * 10 + (data[pos++] - '0');
            if (v > (1 << 24))
            {
                throw ParseError(where + ": header", std::string(field) + " is too large");
            }
        }
        if (pos == begin)
        {
            throw ParseError(where + ": header", std::string("missing ") + field);
        }
        return v;
    };

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    {
        throw ParseError(where + ": header", "not a binary PGM (P5)");
    }
    pos = 2;
    const long long width = read_int("width");
    const long long height = read_int("height");
    const long long maxval = read_int("maxval");
    if (width < 1 || height < 1)
    {
        throw ParseError(where + ": header", "image must be at least 1x1");
    }
    if (maxval < 1 || maxval > 65535)
    {
        throw ParseError(where + ": header", "maxval must lie in [1, 65535]");
    }
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    {
        throw ParseError(where + ": header", "missing separator before raster");
    }
    ++pos;

    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const auto expected = static_cast<std::size_t>(width * height) * bytes_per;
    if (data.size() - pos < expected)
    {
        throw ParseError(where + ": raster", "expected " + std::to_string(expected) +
                                                 " bytes, found " +
                                                 std::to_string(data.size() - pos));
    }
    Mask mask(height, width);
    const auto* raw = reinterpret_cast<const unsigned char*>(data.data() + pos);
    for (Index i = 0; i < mask.size(); ++i)
    {
        unsigned v = raw[static_cast<std::size_t>(i) * bytes_per];
        if (bytes_per == 2)
        {
            v = (v << 8) | raw[static_cast<std::size_t>(i) * 2 + 1];
        }
        if (v > static_cast<unsigned>(maxval))
        {
            throw ParseError(where + ": pixel " + std::to_string(i),
                             "value exceeds maxval");
        }
        mask.data()[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return mask;
}

//------------------------------------------------------------------------------
// Camera rigs
//------------------------------------------------------------------------------

void save_rig(const fs::path& path, const std::vector<View>& views)
{
    json doc;
    doc["format"] = "pointsil-rig";
    doc["version"] = 1;
    doc["views"] = json::array();
    for (const View& v : views)
    {
        const auto& rot = v.extrinsics.rotation();
        const auto& t = v.extrinsics.translation();
        json j;
        j["rotation"] = {rot(0, 0), rot(0, 1), rot(0, 2), rot(1, 0), rot(1, 1),
                         rot(1, 2), rot(2, 0), rot(2, 1), rot(2, 2)};
        j["translation"] = {t.x(), t.y(), t.z()};
        j["fx"] = v.intrinsics.fx;
        j["fy"] = v.intrinsics.fy;
        j["cx"] = v.intrinsics.cx;
        j["cy"] = v.intrinsics.cy;
        j["height"] = v.height;
        j["width"] = v.width;
        j["mode"] = to_string(v.mode);
        doc["views"].push_back(j);
    }
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::vector<View> load_rig(const fs::path& path)
{
    const std::string text = read_file(path);
    const std::string where = path.string();
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ParseError(where + ": byte " + std::to_string(e.byte), "invalid JSON");
    }

    auto field = [&](const json& obj, const std::string& loc, const char* key) -> const json& {
        if (!obj.is_object() || !obj.contains(key))
        {
            throw ParseError(where + ": " + loc, std::string("missing field '") + key + "'");
        }
        return obj.at(key);
    };
    auto number = [&](const json& obj, const std::string& loc, const char* key) {
        const json& v = field(obj, loc, key);
        if (!v.is_number())
        {
            throw ParseError(where + ": " + loc + "." + key, "expected a number");
        }
        return v.get<double>();
    };
    auto integer = [&](const json& obj, const std::string& loc, const char* key) {
        const json& v = field(obj, loc, key);
        if (!v.is_number_integer())
        {
            throw ParseError(where + ": " + loc + "." + key, "expected an integer");
        }
        return v.get<long long>();
    };
    auto numbers = [&](const json& obj, const std::string& loc, const char* key,
                       std::size_t count) {
        const json& v = field(obj, loc, key);
        if (!v.is_array() || v.size() != count)
        {
            throw ParseError(where + ": " + loc + "." + key,
                             "expected an array of " + std::to_string(count) + " numbers");
        }
        std::vector<double> out;
        for (const json& x : v)
        {
            if (!x.is_number())
            {
                throw ParseError(where + ": " + loc + "." + key, "expected numbers");
            }
            out.push_back(x.get<double>());
        }
        return out;
    };

    if (!doc.is_object() || doc.value("format", "") != "pointsil-rig")
    {
        throw ParseError(where + ": format", "expected \"format\": \"pointsil-rig\"");
    }
    if (doc.value("version", 0) != 1)
    {
        throw ParseError(where + ": version", "unsupported version");
    }
    const json& list = field(doc, "document", "views");
    if (!list.is_array())
    {
        throw ParseError(where + ": views", "expected an array");
    }

    std::vector<View> views;
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        const std::string loc = "views[" + std::to_string(i) + "]";
        const json& j = list[i];
        const auto r = numbers(j, loc, "rotation", 9);
        const auto t = numbers(j, loc, "translation", 3);
        Eigen::Matrix3d rot;
        rot << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
        if (!rot.allFinite() || !(rotation_defect(rot) <= rotation_tolerance))
        {
            throw ParseError(where + ": " + loc + ".rotation",
                             "rotation must be orthonormal with determinant +1");
        }
        const std::string mode_name = field(j, loc, "mode").is_string()
                                          ? field(j, loc, "mode").get<std::string>()
                                          : std::string();
        ProjectionMode mode;
        if (mode_name == "perspective")
        {
            mode = ProjectionMode::perspective;
        }
        else if (mode_name == "orthographic")
        {
            mode = ProjectionMode::orthographic;
        }
        else
        {
            throw ParseError(where + ": " + loc + ".mode",
                             "expected \"perspective\" or \"orthographic\"");
        }
        const long long height = integer(j, loc, "height");
        const long long width = integer(j, loc, "width");
        if (height < 1 || width < 1)
        {
            throw ParseError(where + ": " + loc, "height and width must be >= 1");
        }
        const double fx = number(j, loc, "fx");
        const double fy = number(j, loc, "fy");
        if (!(fx > 0) || !(fy > 0))
        {
            throw ParseError(where + ": " + loc, "fx and fy must be > 0");
        }
        try
        {
            views.emplace_back(Extrinsics(rot, Eigen::Vector3d(t[0], t[1], t[2])),
                               Intrinsics(fx, fy, number(j, loc, "cx"), number(j, loc, "cy")),
                               height, width, mode);
        }
        catch (const InvalidArgument& e)
        {
            throw ParseError(where + ": " + loc, e.what());
        }
    }
    return views;
}

//------------------------------------------------------------------------------
// Traces
//------------------------------------------------------------------------------

void save_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace)
{
    std::ofstream out = open_out(path);
    out << "iteration,total,bce,affinity,chamfer\n";
    for (const TraceRow& r : trace)
    {
        out << r.iteration << ',' << format_double(r.total) << ','
            << format_double(r.bce) << ',' << format_double(r.affinity) << ','
            << format_double(r.chamfer) << '\n';
    }
}

} // namespace pointsil::io
