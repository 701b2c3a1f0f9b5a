#pragma once

#include <string>
#include <vector>

#include "chinv/complexpoly.hpp"

namespace chinv {

// Axis-aligned view rectangle [re0, re1] x [im0, im1].
struct Window {
  double re0 = -1.0, re1 = 1.0, im0 = -1.0, im1 = 1.0;
  double width() const { return re1 - re0; }
  double height() const { return im1 - im0; }
  double diagonal() const;
  bool contains(cplx z) const {
    return z.real() >= re0 && z.real() <= re1 && z.imag() >= im0 && z.imag() <= im1;
  }
  Window inflated(double factor) const;
};

enum class CurveTag {
  inflection_positive,   // Im R' = 0, Re R' > 0
  inflection_negative,   // Im R' = 0, Re R' < 0 (merge-capable branch)
  separatrix,
  forward_orbit,
  nongeneric_image,
};

struct Polyline {
  CurveTag tag;
  std::vector<cplx> points;
};

struct CurveSet {
  Window window;
  std::vector<Polyline> polylines;
};

const char* to_string(CurveTag tag);

// One path per polyline; the tag rides along as a data attribute.
std::string curves_to_svg(const CurveSet& cs);
// Rows "curve_id,tag,re,im".
std::string curves_to_csv(const CurveSet& cs);

}  // namespace chinv
