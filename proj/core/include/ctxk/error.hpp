#pragma once

#include <stdexcept>
#include <string>

namespace ctxk {

// Every failure surfaced by the control plane carries a stable machine code
// (e.g. "SchemaError", "WrongOtp") plus an optional document path. The HTTP
// layer and ctxctl serialize these as {error, path?, detail}.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail, std::string path = {});

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string code_;
  std::string detail_;
  std::string path_;
};

namespace errc {
inline constexpr const char* kSyntaxError = "SyntaxError";
inline constexpr const char* kSchemaError = "SchemaError";
inline constexpr const char* kDuplicateDomain = "DuplicateDomain";
inline constexpr const char* kUnknownDomain = "UnknownDomain";
inline constexpr const char* kUnknownSource = "UnknownSource";
inline constexpr const char* kEmptyAuthorizedRoles = "EmptyAuthorizedRoles";
inline constexpr const char* kInvalidUnit = "InvalidUnit";
inline constexpr const char* kConnectFailed = "ConnectFailed";
inline constexpr const char* kConnectionLost = "ConnectionLost";
inline constexpr const char* kNotFound = "NotFound";
inline constexpr const char* kWriteFailed = "WriteFailed";
inline constexpr const char* kUnknownRole = "UnknownRole";
inline constexpr const char* kUnknownAgent = "UnknownAgent";
inline constexpr const char* kUnknownSession = "UnknownSession";
inline constexpr const char* kSupersetViolation = "SupersetViolation";
inline constexpr const char* kEqualSetViolation = "EqualSetViolation";
inline constexpr const char* kTierViolation = "TierViolation";
inline constexpr const char* kSessionKilled = "SessionKilled";
inline constexpr const char* kUnknownApproval = "UnknownApproval";
inline constexpr const char* kWrongTier = "WrongTier";
inline constexpr const char* kNotPending = "NotPending";
inline constexpr const char* kWrongOtp = "WrongOtp";
inline constexpr const char* kExpired = "Expired";
inline constexpr const char* kReplay = "Replay";
inline constexpr const char* kWrongChannel = "WrongChannel";
inline constexpr const char* kAuditFailure = "AuditFailure";
inline constexpr const char* kOtpInAuditDetail = "OtpInAuditDetail";
inline constexpr const char* kPermissionEngineUnavailable = "PermissionEngineUnavailable";
inline constexpr const char* kDirectoryNotEmpty = "DirectoryNotEmpty";
inline constexpr const char* kTimestampTie = "TimestampTie";
inline constexpr const char* kUnauthorized = "Unauthorized";
inline constexpr const char* kBadRequest = "BadRequest";
inline constexpr const char* kBindFailure = "BindFailure";
}  // namespace errc

}  // namespace ctxk
