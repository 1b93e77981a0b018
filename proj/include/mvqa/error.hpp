#pragma once

#include <stdexcept>
#include <string>

namespace mvqa {

// Every failure carries a module-qualified code, e.g. "mg_model/ZeroEvidence".
// Cap-style codes map to CLI exit status 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string code, const std::string& message)
      : std::runtime_error("[" + module + "/" + code + "] " + message),
        module_(std::move(module)),
        code_(std::move(code)) {}

  const std::string& module() const { return module_; }
  const std::string& code() const { return code_; }

  bool is_cap_exceeded() const {
    return code_ == "CapExceeded" || code_ == "StateSpaceExceeded" ||
           code_ == "EnumerationBudgetExceeded" || code_ == "UnencodableBid";
  }

 private:
  std::string module_;
  std::string code_;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

}  // namespace mvqa
