#ifndef DSRL_POINT_HPP
#define DSRL_POINT_HPP

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dsrl/errors.hpp"

namespace dsrl {

/// A position in R^n (sensor or source). Dimension is a runtime value.
using PointN = Eigen::VectorXd;

inline PointN make_point(std::initializer_list<double> coords)
{
    PointN p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p[i++] = c;
    return p;
}

inline bool is_finite(const PointN& p)
{
    return p.allFinite();
}

inline std::size_t dim(const PointN& p)
{
    return static_cast<std::size_t>(p.size());
}

inline void require_dim(const PointN& p, std::size_t n, const char* what)
{
    if (dim(p) != n) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(dim(p)));
    }
}

inline std::vector<double> to_vector(const PointN& p)
{
    return {p.data(), p.data() + p.size()};
}

inline PointN from_vector(const std::vector<double>& v)
{
    return Eigen::Map<const PointN>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace dsrl

#endif // DSRL_POINT_HPP
