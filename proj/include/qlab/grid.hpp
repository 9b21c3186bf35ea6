#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qlab/common.hpp"

namespace qlab {

enum class VertexClass : std::uint8_t { Outside = 0, Boundary = 1, Interior = 2 };

// Discretized domain: a uniform vertex grid over a bounding box with an
// in/out mask.  Rectangles use the full grid; disks (optionally with a hole)
// mask it.  m = 2 is fully supported; higher m is accepted for energy
// evaluation only.
class GridDomain {
  public:
    enum class Shape { Rectangle, Disk };

    static GridDomain rectangle(const Vec& lo, const Vec& hi, double h);
    // Disk of radius R (inner_radius > 0 carves an annulus) centered at c,
    // realized as a masked grid; the outermost in-domain layer is boundary.
    static GridDomain disk(const Vec& center, double radius, double h, double inner_radius = 0.0);

    int m() const { return m_; }
    double h() const { return h_; }
    Shape shape() const { return shape_; }
    const Vec& origin() const { return origin_; }          // vertex (0,...,0) position
    const std::vector<int>& extents() const { return n_; } // vertices per axis

    std::size_t vertex_count() const { return mask_.size(); }
    VertexClass vertex_class(std::size_t v) const { return mask_[v]; }
    bool in_domain(std::size_t v) const { return mask_[v] != VertexClass::Outside; }

    std::size_t index(const std::vector<int>& coords) const;
    std::vector<int> coords(std::size_t v) const;
    Vec position(std::size_t v) const;

    const std::vector<std::size_t>& interior_vertices() const { return interior_; }
    const std::vector<std::size_t>& boundary_vertices() const { return boundary_; }
    const std::vector<std::size_t>& domain_vertices() const { return in_domain_; }

    // Cells with all 2^m corners in-domain; these carry the quadrature.
    const std::vector<std::size_t>& active_cells() const { return cells_; }
    // Corner vertex indices of cell c in binary-counter order
    // (bit k of the corner id advances axis k).
    std::vector<std::size_t> cell_corners(std::size_t cell) const;
    std::vector<int> cell_coords(std::size_t cell) const;
    Vec cell_center(std::size_t cell) const;

    // Axis-aligned edges belonging to at least one active cell, with the
    // finite-difference quadrature weight w_e (already includes h^m and the
    // usual 1/2 on domain-face edges).
    struct Edge {
        std::size_t a = 0, b = 0;  // b is a's neighbor in +axis direction
        int axis = 0;
        double weight = 0.0;       // w_e; energy contribution = weight * cost / h^2
    };
    const std::vector<Edge>& edges() const { return edges_; }
    // Edge list indices incident to a vertex.
    const std::vector<std::vector<std::uint32_t>>& vertex_edges() const { return vertex_edges_; }

    double cell_volume() const;  // h^m
    double domain_volume() const { return static_cast<double>(cells_.size()) * cell_volume(); }

    // Disk metadata (valid when shape() == Disk).
    const Vec& disk_center() const { return center_; }
    double disk_radius() const { return radius_; }
    double disk_inner_radius() const { return inner_radius_; }

  private:
    void classify();

    Shape shape_ = Shape::Rectangle;
    int m_ = 2;
    double h_ = 0.0;
    Vec origin_;
    std::vector<int> n_;
    std::vector<VertexClass> mask_;
    std::vector<std::size_t> interior_, boundary_, in_domain_;
    std::vector<std::size_t> cells_;
    std::vector<std::uint8_t> cell_active_;
    std::vector<int> cell_extents_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::uint32_t>> vertex_edges_;
    Vec center_;
    double radius_ = 0.0, inner_radius_ = 0.0;
};

// Area of the intersection of the disk |p - c| <= r with the axis-aligned
// rectangle [x0,x1] x [y0,y1].  Closed form.
double disk_rect_overlap(double cx, double cy, double r, double x0, double x1, double y0,
                         double y1);

// Per-active-cell covered fraction of the disk B_r(center) (m = 2).  Throws
// contract_violation when a positively covered cell is not active or the
// disk leaves the grid box.
std::vector<double> disk_cell_cover(const GridDomain& dom, const Vec& center, double r);

// Area and centroid of the same intersection (absolute coordinates).
struct ClipMoments {
    double area = 0.0;
    double cx = 0.0, cy = 0.0;  // centroid, valid when area > 0
};
ClipMoments disk_rect_clip_moments(double cx, double cy, double r, double x0, double x1,
                                   double y0, double y1);

}  // namespace qlab
