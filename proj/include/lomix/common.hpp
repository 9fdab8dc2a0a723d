#pragma once

#include <complex>
#include <stdexcept>

namespace lomix {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Every failure mode gets its own type so callers can react precisely;
// all derive from Error for coarse handling at a boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define LOMIX_ERROR_TYPE(NAME) \
  struct NAME : Error {        \
    using Error::Error;        \
  }

LOMIX_ERROR_TYPE(NotMixing);            // transition matrix fails primitivity
LOMIX_ERROR_TYPE(WordTooShort);         // word shorter than the data depth requires
LOMIX_ERROR_TYPE(NonPositiveRoof);      // roof values must be strictly positive
LOMIX_ERROR_TYPE(RootBracketFailure);   // scalar root finder found no sign change
LOMIX_ERROR_TYPE(DimensionMismatch);
LOMIX_ERROR_TYPE(DepthMismatch);
LOMIX_ERROR_TYPE(SingularResolvent);    // (I - L) not invertible at the requested point
LOMIX_ERROR_TYPE(GapTooSmall);          // leading eigenvalue not isolated enough to split
LOMIX_ERROR_TYPE(LatticeModel);         // twisted leading eigenvalue returns to modulus one
LOMIX_ERROR_TYPE(NoiseFloor);           // requested tolerance is below double precision
LOMIX_ERROR_TYPE(NotInKernel);          // vector has a component along the roof direction
LOMIX_ERROR_TYPE(SeriesNotTerminated);  // orbit sum truncated before its support ended
LOMIX_ERROR_TYPE(QuadratureUnconverged);
LOMIX_ERROR_TYPE(NoConvergence);
LOMIX_ERROR_TYPE(CombinatorialBlowup);  // enumeration exceeded its work budget
LOMIX_ERROR_TYPE(OutsideDomain);
LOMIX_ERROR_TYPE(NotLoxodromic);        // 2x2 factor has |trace| <= 2
LOMIX_ERROR_TYPE(MissingUpstreamArtifact);

#undef LOMIX_ERROR_TYPE

// Compensated accumulation. T is double or std::complex<double>.
template <class T>
class KahanSum {
 public:
  void add(T x) {
    T y = x - c_;
    T t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  T value() const { return s_; }

 private:
  T s_{};
  T c_{};
};

}  // namespace lomix
