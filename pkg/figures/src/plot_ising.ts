import { runFigureCli } from "./cli.js";

process.exit(runFigureCli("ising", process.argv.slice(2)));
