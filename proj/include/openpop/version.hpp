#ifndef OPENPOP_VERSION_HPP
#define OPENPOP_VERSION_HPP

namespace openpop {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

} // namespace openpop

#endif // OPENPOP_VERSION_HPP
