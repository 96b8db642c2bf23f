#include "pfl/errors.hpp"

namespace pfl {

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ResourceExhausted& e) {
    throw ResourceExhausted(context + ": " + e.what());
  } catch (const GridMismatch& e) {
    throw GridMismatch(context + ": " + e.what());
  } catch (const NonConvergence& e) {
    throw NonConvergence(context + ": " + e.what());
  } catch (const InvalidBoundary& e) {
    throw InvalidBoundary(context + ": " + e.what());
  } catch (const BracketFailure& e) {
    throw BracketFailure(context + ": " + e.what());
  } catch (const ResolutionExhausted& e) {
    throw ResolutionExhausted(context + ": " + e.what());
  } catch (const EmptySet& e) {
    throw EmptySet(context + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const NonFinite& e) {
    throw NonFinite(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

}  // namespace pfl
