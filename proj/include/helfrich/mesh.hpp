#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace helfrich {

using Vec3 = Eigen::Vector3d;

/// Analytic surface attached to a generated primitive; refinement projects
/// newly created vertices back onto it.
class SurfaceProjector {
  public:
    virtual ~SurfaceProjector() = default;
    virtual Vec3 project(const Vec3& p) const = 0;
    /// Midpoints of boundary edges go to the analytic boundary curve.
    virtual Vec3 project_boundary(const Vec3& p) const { return project(p); }
    virtual std::string name() const = 0;
};

/// Connectivity derived once from the face list and shared between meshes
/// with the same topology (the optimizer only moves vertices).
struct MeshTopology {
    int n_vertices = 0;
    std::vector<std::array<int, 3>> faces;

    // derived adjacency
    std::vector<std::vector<int>> vertex_faces;      // incident faces, unordered
    std::vector<std::pair<int, int>> edges;          // a < b
    std::vector<std::array<int, 3>> face_edges;      // edge id opposite corner k
    std::vector<std::vector<int>> edge_faces;        // faces per edge
    std::vector<uint8_t> vertex_on_boundary;
    std::vector<std::vector<int>> boundary_loops;    // winding order, surface on the left
    std::vector<uint8_t> edge_is_boundary;
    std::vector<int> orientation_conflicts;          // faces traversing an interior edge the same way
    std::vector<std::vector<std::array<int, 2>>> vertex_corner_wings;  // per incident face, the
                                                                       // other two vertices in
                                                                       // winding order
    std::vector<std::vector<int>> vertex_neighbors;  // sorted unique ring vertices

    int euler_characteristic() const {
        return n_vertices - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
    }
};

/// Oriented manifold triangle mesh with boundary. Immutable after
/// construction; geometry changes produce a new mesh via with_positions().
struct TriMesh {
    std::vector<Vec3> vertices;
    std::shared_ptr<const MeshTopology> topo;
    std::shared_ptr<const SurfaceProjector> projector;

    const std::vector<std::array<int, 3>>& faces() const { return topo->faces; }
    const std::vector<std::vector<int>>& boundary_loops() const { return topo->boundary_loops; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_faces() const { return static_cast<int>(topo->faces.size()); }
    bool is_closed() const { return topo->boundary_loops.empty() && topo->orientation_conflicts.empty(); }

    TriMesh with_positions(std::vector<Vec3> positions) const;

    double face_area(int f) const;
    Vec3 face_normal(int f) const;         // unit, from winding
    Vec3 face_barycenter(int f) const;
    double total_area() const;
    double bbox_diag2() const;             // squared bounding-box diagonal
    Vec3 centroid() const;
};

/// Builds the shared topology. Tolerates invalid meshes (validate() reports
/// the defects); throws only on malformed input such as out-of-range indices.
TriMesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces,
                  std::shared_ptr<const SurfaceProjector> projector = nullptr);

enum class PrimitiveKind { Icosphere, Disk, Cylinder, Torus, PlanePatch, SphericalCap };

struct PrimitiveSpec {
    PrimitiveKind kind = PrimitiveKind::Icosphere;
    double radius = 1.0;        // sphere/disk/cylinder radius, torus major radius
    double minor_radius = 0.3;  // torus tube radius
    double height = 1.0;        // cylinder
    double cap_angle = 1.0;     // spherical cap opening angle, radians
    double extent = 1.0;        // plane patch side length
    int level = 0;              // refinement depth, capped at 8
};

TriMesh generate_primitive(const PrimitiveSpec& spec);

/// Midpoint 1->4 subdivision. Parent vertices keep their index and position;
/// new vertices are re-projected when the mesh carries a projector.
TriMesh refine(const TriMesh& mesh);

struct ValidationIssue {
    enum class Kind {
        NonManifoldEdge,
        OrientationConflict,
        DegenerateFace,
        IsolatedVertex,
        BoundaryLoopMismatch,
    };
    Kind kind;
    std::vector<int> simplices;  // offending face/vertex/edge-endpoint indices
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

ValidationReport validate(const TriMesh& mesh);

// ASCII mesh I/O. Format from the file extension: .obj, .off, .json (native).
TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

}  // namespace helfrich
