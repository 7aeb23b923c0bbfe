import init, { Demo } from './pkg/taxgan_web.js';

const $ = (id) => document.getElementById(id);

let demo = null;
let running = false;
let history = [];

const css = (name) => getComputedStyle(document.documentElement).getPropertyValue(name).trim();

function setupCanvas(canvas) {
  const ctx = canvas.getContext('2d');
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = css('--bg');
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function drawAxes(ctx, canvas, pad) {
  ctx.strokeStyle = css('--line');
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, canvas.height - pad);
  ctx.lineTo(canvas.width - pad / 2, canvas.height - pad);
  ctx.stroke();
}

function drawCurves() {
  const canvas = $('curve');
  const ctx = setupCanvas(canvas);
  const pad = 46;
  drawAxes(ctx, canvas, pad);
  if (history.length < 2) return;

  const w = canvas.width - pad * 1.5;
  const h = canvas.height - pad * 1.5;
  const n = history.length;
  const lo = Math.min(0, ...history.map(p => Math.min(p.cosine, p.euclidean)));
  const hi = 1.0;
  const x = (i) => pad + (i / (n - 1)) * w;
  const y = (v) => pad / 2 + (1 - (v - lo) / (hi - lo)) * h;

  ctx.fillStyle = css('--muted');
  ctx.font = '12px system-ui';
  for (const tick of [lo, (lo + hi) / 2, hi]) {
    ctx.fillText(tick.toFixed(2), 6, y(tick) + 4);
  }
  ctx.fillText('0', pad, canvas.height - pad + 16);
  ctx.fillText(String(history[n - 1].epoch + 1), pad + w - 10, canvas.height - pad + 16);

  for (const [key, color] of [['cosine', css('--green')], ['euclidean', css('--red')]]) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.8;
    ctx.beginPath();
    history.forEach((p, i) => {
      if (i === 0) ctx.moveTo(x(i), y(p[key]));
      else ctx.lineTo(x(i), y(p[key]));
    });
    ctx.stroke();
  }
}

function drawHistogram(report) {
  const canvas = $('hist');
  const ctx = setupCanvas(canvas);
  const pad = 46;
  drawAxes(ctx, canvas, pad);

  const scores = report.entries.map(e => e.score);
  const lo = Math.min(...scores, report.threshold) - 0.02;
  const hi = 1.0;
  const bins = 60;
  const w = canvas.width - pad * 1.5;
  const h = canvas.height - pad * 1.5;
  const genuine = new Array(bins).fill(0);
  const fraud = new Array(bins).fill(0);
  for (const e of report.entries) {
    const b = Math.min(bins - 1, Math.max(0, Math.floor((e.score - lo) / (hi - lo) * bins)));
    (e.is_fraud ? fraud : genuine)[b] += 1;
  }
  const peak = Math.max(...genuine.map((g, i) => g + fraud[i]), 1);
  const bw = w / bins;
  for (let b = 0; b < bins; b++) {
    const x0 = pad + b * bw;
    const gh = genuine[b] / peak * h;
    const fh = fraud[b] / peak * h;
    ctx.fillStyle = css('--green');
    ctx.globalAlpha = 0.75;
    ctx.fillRect(x0 + 0.5, canvas.height - pad - gh, bw - 1, gh);
    ctx.fillStyle = css('--red');
    ctx.fillRect(x0 + 0.5, canvas.height - pad - gh - fh, bw - 1, fh);
    ctx.globalAlpha = 1;
  }

  // threshold marker
  const tx = pad + (report.threshold - lo) / (hi - lo) * w;
  ctx.strokeStyle = css('--amber');
  ctx.setLineDash([6, 4]);
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  ctx.moveTo(tx, pad / 2);
  ctx.lineTo(tx, canvas.height - pad);
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.fillStyle = css('--muted');
  ctx.font = '12px system-ui';
  ctx.fillText(lo.toFixed(2), pad - 8, canvas.height - pad + 16);
  ctx.fillText('1.00', pad + w - 18, canvas.height - pad + 16);
  ctx.fillText('score', pad + w / 2, canvas.height - pad + 16);
}

function renderReport(report) {
  const fmt = (v) => v === null || v === undefined ? '—' : v.toFixed(4);
  $('score-stats').innerHTML = `
    <span>Q1 <b>${fmt(report.q1)}</b></span>
    <span>Q3 <b>${fmt(report.q3)}</b></span>
    <span>threshold <b>${fmt(report.threshold)}</b></span>
    <span>flagged <b>${report.flagged_count}</b> of ${report.total_count}</span>
    <span>ROC-AUC <b>${fmt(report.roc_auc)}</b></span>
    <span>flagged precision <b>${fmt(report.precision)}</b></span>`;

  const flagged = report.entries.filter(e => e.flagged);
  const rows = flagged.map(e => `
    <tr>
      <td>${e.rank}</td>
      <td>${e.taxpayer_id}</td>
      <td>${e.score.toFixed(4)}</td>
      <td class="${e.is_fraud ? 'fraud' : 'genuine'}">${e.is_fraud ? 'injected fraud' : 'genuine'}</td>
    </tr>`).join('');
  $('flagged').innerHTML = flagged.length
    ? `<table><thead><tr><th>rank</th><th>taxpayer</th><th>cosine score</th><th>ground truth</th></tr></thead>
       <tbody>${rows}</tbody></table>`
    : '<p class="status">Nothing flagged.</p>';
  drawHistogram(report);
}

function setRunning(state) {
  running = state;
  $('train').disabled = state || !demo;
  $('generate').disabled = state;
  $('stop').disabled = !state;
  $('score').disabled = state || !demo || history.length === 0;
}

async function trainLoop() {
  const total = demo.total_epochs();
  while (running && demo.epochs_run() < total) {
    const step = JSON.parse(demo.step_epoch());
    history.push({
      epoch: step.epoch,
      cosine: step.cosine.mean_cosine,
      euclidean: step.euclidean.mean_cosine,
    });
    drawCurves();
    $('train-status').textContent =
      `epoch ${step.epoch + 1}/${total} · mean cosine: ` +
      `cosine ${step.cosine.mean_cosine.toFixed(4)}, euclidean ${step.euclidean.mean_cosine.toFixed(4)} · ` +
      `d-loss ${step.cosine.d_loss.toFixed(3)}`;
    // yield to the event loop so the page stays responsive
    await new Promise(r => setTimeout(r, 0));
  }
  setRunning(false);
}

async function main() {
  await init();

  $('generate').addEventListener('click', () => {
    try {
      demo = new Demo(
        Number($('n-genuine').value),
        Number($('n-fraud').value),
        Number($('months').value),
        Number($('synth-seed').value),
      );
      const summary = JSON.parse(demo.dataset_summary());
      $('dataset-status').textContent =
        `${summary.taxpayers} taxpayers (${summary.fraud} injected fraud), ` +
        `${summary.months} months each, ${summary.feature_dim} features per taxpayer.`;
      history = [];
      drawCurves();
      $('train').disabled = false;
      $('score').disabled = true;
      $('train-status').textContent = '';
    } catch (e) {
      $('dataset-status').textContent = `error: ${e}`;
    }
  });

  $('train').addEventListener('click', () => {
    try {
      demo.start_training(
        Number($('epochs').value),
        Number($('batch').value),
        Number($('latent').value),
        Number($('train-seed').value),
      );
      history = [];
      setRunning(true);
      trainLoop();
    } catch (e) {
      $('train-status').textContent = `error: ${e}`;
      setRunning(false);
    }
  });

  $('stop').addEventListener('click', () => { running = false; });

  $('score').addEventListener('click', () => {
    try {
      renderReport(JSON.parse(demo.score_report()));
    } catch (e) {
      $('score-stats').textContent = `error: ${e}`;
    }
  });

  drawCurves();
}

main();
