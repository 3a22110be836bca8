#ifndef POINTSIL_TOOLS_COMMANDS_HPP
#define POINTSIL_TOOLS_COMMANDS_HPP

namespace pointsil::cli
{

/// Parses the command line and runs one subcommand. Returns the exit code.
int run(int argc, char** argv);

} // namespace pointsil::cli

#endif // POINTSIL_TOOLS_COMMANDS_HPP
