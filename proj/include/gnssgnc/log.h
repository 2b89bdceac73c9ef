/*
 * gnssgnc — stderr logger gated by the LOG_LEVEL environment variable
 * (error|warn|info|debug). File outputs are never routed through here,
 * so log verbosity cannot perturb reproducible artifacts.
 */
#ifndef GNSSGNC_LOG_H
#define GNSSGNC_LOG_H

#include <string>

namespace gnssgnc::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

Level level();

void error(const std::string& msg);
void warn(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace gnssgnc::log

#endif
