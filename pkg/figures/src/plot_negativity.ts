import { runFigureCli } from "./cli.js";

process.exit(runFigureCli("negativity", process.argv.slice(2)));
