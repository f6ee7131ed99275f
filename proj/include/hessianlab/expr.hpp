#pragma once

#include "hessianlab/torusgrid.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hessianlab {

/// Syntax or periodicity failure; position is the byte offset in the text.
class expr_error : public std::runtime_error {
public:
    expr_error(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

/// Grammar: sums/products/quotients of real literals, pi, the torus
/// coordinates x1,y1[,x2,y2], and sin/cos/exp applications.  Every sin/cos
/// argument must be an affine form with frequencies that are integer
/// multiples of 2*pi, so parsed fields are exactly periodic; anything else
/// is rejected with expr_error.
ScalarField parse_field_expression(const std::string& text, const TorusGrid& grid);

} // namespace hessianlab
