import { runFigureCli } from "./cli.js";

process.exit(runFigureCli("concurrence", process.argv.slice(2)));
