#include "commands.hpp"

int main(int argc, char** argv)
{
    return pointsil::cli::run(argc, argv);
}
