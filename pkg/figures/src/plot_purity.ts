import { runFigureCli } from "./cli.js";

process.exit(runFigureCli("purity", process.argv.slice(2)));
