#include "splinesde/errors.hpp"

#include <sstream>

namespace splinesde {
namespace {

std::string domain_message(double value, double lower, double upper,
                           DomainKind kind) {
  std::ostringstream os;
  os.precision(17);
  os << "value " << value << " outside ";
  switch (kind) {
    case DomainKind::Potential: os << "drift-potential domain "; break;
    case DomainKind::Lamperti: os << "Lamperti-map domain "; break;
    case DomainKind::Unspecified: os << "spline domain "; break;
  }
  os << "[" << lower << ", " << upper << "]";
  return os.str();
}

std::string stall_message(std::size_t interval, std::size_t attempts, double r,
                          double r_plus) {
  std::ostringstream os;
  os.precision(10);
  os << "rejection sampler stalled on interval " << interval << " after "
     << attempts << " attempts (r = " << r << ", r_plus = " << r_plus << ")";
  return os.str();
}

}  // namespace

DomainExceeded::DomainExceeded(double value, double lower, double upper,
                               DomainKind kind)
    : Error(domain_message(value, lower, upper, kind)),
      value_(value),
      lower_(lower),
      upper_(upper),
      kind_(kind) {}

RejectionStall::RejectionStall(std::size_t interval, std::size_t attempts,
                               double r, double r_plus)
    : Error(stall_message(interval, attempts, r, r_plus)),
      interval_(interval),
      attempts_(attempts),
      r_(r),
      r_plus_(r_plus) {}

}  // namespace splinesde
