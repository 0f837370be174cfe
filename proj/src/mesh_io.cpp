#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helfrich/mesh.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

namespace {

std::string extension(const std::string& path) {
    auto dot = path.find_last_of('.');
    return dot == std::string::npos ? "" : path.substr(dot + 1);
}

void save_obj(const TriMesh& mesh, std::ostream& os) {
    for (const auto& v : mesh.vertices)
        os << "v " << format_double(v.x()) << " " << format_double(v.y()) << " "
           << format_double(v.z()) << "\n";
    for (const auto& f : mesh.faces())
        os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

TriMesh load_obj(std::istream& is) {
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            double x, y, z;
            ls >> x >> y >> z;
            require(!ls.fail(), "malformed OBJ vertex line");
            v.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::array<int, 3> tri{};
            for (int k = 0; k < 3; ++k) {
                std::string tok;
                ls >> tok;
                require(!tok.empty(), "OBJ face needs three vertices");
                tri[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
            }
            f.push_back(tri);
        }
    }
    return make_mesh(std::move(v), std::move(f));
}

void save_off(const TriMesh& mesh, std::ostream& os) {
    os << "OFF\n" << mesh.n_vertices() << " " << mesh.n_faces() << " 0\n";
    for (const auto& v : mesh.vertices)
        os << format_double(v.x()) << " " << format_double(v.y()) << " " << format_double(v.z())
           << "\n";
    for (const auto& f : mesh.faces()) os << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
}

TriMesh load_off(std::istream& is) {
    std::string header;
    is >> header;
    require(header == "OFF", "not an OFF file");
    int nv = 0, nf = 0, ne = 0;
    is >> nv >> nf >> ne;
    require(is.good() && nv >= 0 && nf >= 0, "malformed OFF header");
    std::vector<Vec3> v(nv);
    for (auto& p : v) is >> p.x() >> p.y() >> p.z();
    std::vector<std::array<int, 3>> f(nf);
    for (auto& tri : f) {
        int count;
        is >> count;
        require(count == 3, "only triangle OFF faces are supported");
        is >> tri[0] >> tri[1] >> tri[2];
    }
    require(!is.fail(), "malformed OFF body");
    return make_mesh(std::move(v), std::move(f));
}

void save_json(const TriMesh& mesh, std::ostream& os) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) j["vertices"].push_back({v.x(), v.y(), v.z()});
    j["faces"] = nlohmann::json::array();
    for (const auto& f : mesh.faces()) j["faces"].push_back({f[0], f[1], f[2]});
    os << j.dump();
}

TriMesh load_json(std::istream& is) {
    nlohmann::json j = nlohmann::json::parse(is);
    std::vector<Vec3> v;
    for (const auto& p : j.at("vertices"))
        v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    std::vector<std::array<int, 3>> f;
    for (const auto& t : j.at("faces"))
        f.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    return make_mesh(std::move(v), std::move(f));
}

}  // namespace

void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    auto ext = extension(path);
    if (ext == "obj")
        save_obj(mesh, os);
    else if (ext == "off")
        save_off(mesh, os);
    else if (ext == "json")
        save_json(mesh, os);
    else
        throw RejectedInput("unknown mesh format: " + path);
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open mesh file: " + path);
    auto ext = extension(path);
    if (ext == "obj") return load_obj(is);
    if (ext == "off") return load_off(is);
    if (ext == "json") return load_json(is);
    throw RejectedInput("unknown mesh format: " + path);
}

}  // namespace helfrich
