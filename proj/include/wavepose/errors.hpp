#ifndef WAVEPOSE_ERRORS_HPP
#define WAVEPOSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wavepose {

/// Base class for all library errors. Carries an optional context prefix so
/// that pipeline stages can annotate a propagating failure in place.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string msg)
      : std::runtime_error(msg), message_(std::move(msg)) {}

  void add_context(const std::string& ctx) {
    message_ = ctx + ": " + message_;
  }

  const char* what() const noexcept override { return message_.c_str(); }

 private:
  std::string message_;
};

#define WAVEPOSE_DEFINE_ERROR(NAME)                       \
  class NAME : public Error {                             \
   public:                                                \
    explicit NAME(std::string msg) : Error(std::move(msg)) {} \
  }

// Geometry / projection
WAVEPOSE_DEFINE_ERROR(FrontalityError);      // wavefront at or behind the array plane
WAVEPOSE_DEFINE_ERROR(DegeneracyError);      // degenerate input configuration
WAVEPOSE_DEFINE_ERROR(GeometryError);        // inconsistent geometric input
WAVEPOSE_DEFINE_ERROR(ParallelRaysError);    // triangulation rays (near) parallel
WAVEPOSE_DEFINE_ERROR(CheiralityError);      // no pose candidate passes the depth test

// Estimation
WAVEPOSE_DEFINE_ERROR(InsufficientDataError);
WAVEPOSE_DEFINE_ERROR(NonConvergenceError);
WAVEPOSE_DEFINE_ERROR(SingularNormalMatrixError);
WAVEPOSE_DEFINE_ERROR(DivisionDegeneracyError);
WAVEPOSE_DEFINE_ERROR(NoIntersectionError);
WAVEPOSE_DEFINE_ERROR(AmbiguityError);

// Array front end
WAVEPOSE_DEFINE_ERROR(RankError);
WAVEPOSE_DEFINE_ERROR(AssociationError);

// Simulation / harness
WAVEPOSE_DEFINE_ERROR(ConfigError);
WAVEPOSE_DEFINE_ERROR(MixingError);
WAVEPOSE_DEFINE_ERROR(EmptyInputError);

#undef WAVEPOSE_DEFINE_ERROR

}  // namespace wavepose

#endif  // WAVEPOSE_ERRORS_HPP
