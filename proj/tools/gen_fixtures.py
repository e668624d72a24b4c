# Copyright 2026 The previous-kit Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the network and expected-value fixtures under tests/fixtures.

Metrics in expected/ come from the small counter below, written separately
from the C++ implementation.
"""

import json
import os

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'tests', 'fixtures')


def conv(n,i,k,N,s=1,p=0,g=1,bias=True): return dict(name=n,kind='conv',inputs=[i],kernel_h=k,kernel_w=k,stride=s,pad=p,num_kernels=N,groups=g,has_bias=bias)
def relu(n,i): return dict(name=n,kind='relu',inputs=[i])
def bn(n,i): return dict(name=n,kind='batchnorm',inputs=[i])
def scale(n,i): return dict(name=n,kind='scale',inputs=[i],has_bias=True)
def pool(n,i,fn,k,s,p=0): return dict(name=n,kind='pool',inputs=[i],pool_fn=fn,global_pool=False,kernel_h=k,kernel_w=k,stride=s,pad=p)
def gpool(n,i,fn='avg'): return dict(name=n,kind='pool',inputs=[i],pool_fn=fn,global_pool=True)
def fc(n,i,N): return dict(name=n,kind='fc',inputs=[i],out_features=N,has_bias=True)
def softmax(n,i): return dict(name=n,kind='softmax',inputs=[i])
def concat(n,ins): return dict(name=n,kind='concat',inputs=ins)
def elt(n,ins): return dict(name=n,kind='eltwise',inputs=ins,eltwise_fn='sum')
def dump(net):
    lines=['{','  "name": '+json.dumps(net['name'])+',','  "input": '+json.dumps(net['input'],separators=(',',':'))+',','  "layers": [']
    ls=[json.dumps(l,separators=(',',':')) for l in net['layers']]
    lines += ['    '+l+(',' if i+1<len(ls) else '') for i,l in enumerate(ls)]
    lines += ['  ]','}']
    return '\n'.join(lines)+'\n'

def alexnet():
    L=[conv('conv1','input',11,96,4),relu('relu1','conv1'),pool('pool1','relu1','max',3,2),
       conv('conv2','pool1',5,256,1,2,2),relu('relu2','conv2'),pool('pool2','relu2','max',3,2),
       conv('conv3','pool2',3,384,1,1),relu('relu3','conv3'),
       conv('conv4','relu3',3,384,1,1,2),relu('relu4','conv4'),
       conv('conv5','relu4',3,256,1,1,2),relu('relu5','conv5'),pool('pool5','relu5','max',3,2),
       fc('fc6','pool5',4096),relu('relu6','fc6'),fc('fc7','relu6',4096),relu('relu7','fc7'),
       fc('fc8','relu7',1000),softmax('prob','fc8')]
    return dict(name='alexnet',input=dict(h=227,w=227,c=3),layers=L)

def allcnnc():
    L=[]; prev='input'
    layers=[('conv1',3,96,1,1),('conv2',3,96,1,1),('conv3',3,96,2,1),('conv4',3,192,1,1),('conv5',3,192,1,1),
          ('conv6',3,192,2,1),('conv7',3,192,1,0),('conv8',1,192,1,0),('conv9',1,10,1,0)]
    for n,k,N,s,p in layers:
        L.append(conv(n,prev,k,N,s,p)); L.append(relu('relu'+n[4:],n)); prev='relu'+n[4:]
    L.append(gpool('pool','relu9')); L.append(softmax('prob','pool'))
    return dict(name='all_cnn_c',input=dict(h=32,w=32,c=3),layers=L)

def squeezenet():
    L=[conv('conv1','input',7,96,2),bn('bn_conv1','conv1'),relu('relu_conv1','bn_conv1'),pool('pool1','relu_conv1','max',3,2)]
    prev='pool1'
    fires=[(2,16,64),(3,16,64),(4,32,128),(5,32,128),(6,48,192),(7,48,192),(8,64,256),(9,64,256)]
    for f,s,e in fires:
        p='fire%d'%f
        L += [conv(p+'_squeeze1x1',prev,1,s),relu(p+'_relu_squeeze1x1',p+'_squeeze1x1'),
              conv(p+'_expand1x1',p+'_relu_squeeze1x1',1,e),relu(p+'_relu_expand1x1',p+'_expand1x1'),
              conv(p+'_expand3x3',p+'_relu_squeeze1x1',3,e,1,1),relu(p+'_relu_expand3x3',p+'_expand3x3'),
              concat(p+'_concat',[p+'_relu_expand1x1',p+'_relu_expand3x3'])]
        prev=p+'_concat'
        if f in (4,8):
            L.append(pool('pool%d'%f,prev,'max',3,2)); prev='pool%d'%f
    L += [conv('conv10',prev,1,1000),relu('relu_conv10','conv10'),gpool('pool10','relu_conv10'),softmax('prob','pool10')]
    return dict(name='squeezenet',input=dict(h=227,w=227,c=3),layers=L)

def unseen20():
    L=[conv('conv1','input',3,128,1,1),bn('bn1','conv1'),scale('scale1','bn1'),relu('relu1','scale1'),
       pool('pool1','relu1','max',2,2),
       conv('conv2a','pool1',1,256),conv('conv2b','pool1',3,256,1,1),elt('sum2',['conv2a','conv2b']),
       relu('relu2','sum2'),concat('cat2',['relu2','conv2b']),
       conv('conv3','cat2',3,512,2,1),bn('bn3','conv3'),scale('scale3','bn3'),relu('relu3','scale3'),
       conv('dw3','relu3',3,512,1,1,512),pool('pool3','dw3','avg',2,2),gpool('gpool','pool3'),
       fc('fc1','gpool',256),fc('fc2','fc1',10),softmax('prob','fc2')]
    return dict(name='unseen20',input=dict(h=56,w=56,c=64),layers=L)

nets=[alexnet(),allcnnc(),squeezenet(),unseen20()]
for n in nets:
    open(f"{OUT}/nets/{n['name']}.json",'w').write(dump(n))
    print(n['name'],len(n['layers']))

# Metrics of the AlexNet fixture, counted without the library.
def metrics(net):
    shapes={'input':(net['input']['h'],net['input']['w'],net['input']['c'])}
    rows=[]
    for l in net['layers']:
        ins=[shapes[i] for i in l['inputs']]; h,w,c=ins[0]; nin=h*w*c
        k=l['kind']
        if k=='conv':
            kh=l['kernel_h'];s=l['stride'];p=l['pad'];N=l['num_kernels'];g=l['groups']
            ho=(h+2*p-kh)//s+1; wo=(w+2*p-kh)//s+1; out=(ho,wo,N)
            W=kh*kh*(c//g)*N+N; ops=kh*kh*(c//g)*ho*wo*N+ho*wo*N
        elif k=='fc':
            out=(1,1,l['out_features']); W=nin*l['out_features']+l['out_features']; ops=W
        elif k=='pool':
            kh=l['kernel_h'];s=l['stride'];p=l['pad']
            ho=(h+2*p-kh)//s+1; wo=(w+2*p-kh)//s+1; out=(ho,wo,c); W=0; ops=kh*kh*ho*wo*c
        elif k=='relu': out=(h,w,c); W=0; ops=nin
        elif k=='softmax': out=(h,w,c); W=0; ops=3*nin
        shapes[l['name']]=out
        nout=out[0]*out[1]*out[2]
        rows.append((l['name'],k,out,W,ops,nin+W+nout))
    return rows
rows=metrics(nets[0])
s='# previous-kit v1\n# network=alexnet im2col=false count_bias_ops=true\nlayer,kind,h_out,w_out,c_out,n_weights,ops,mem_ops\n'
for n,k,o,W,ops,mem in rows: s+=f"{n},{k},{o[0]},{o[1]},{o[2]},{W},{ops},{mem}\n"
s+=f"TOTAL,,,,,{sum(r[3] for r in rows)},{sum(r[4] for r in rows)},{sum(r[5] for r in rows)}\n"
open(f"{OUT}/expected/alexnet.metrics.csv",'w').write(s)
macs=sum(r[4]-(r[2][0]*r[2][1]*r[2][2]) for r in rows if r[1] in('conv','fc'))
print('alexnet conv+fc MACs', macs)

# Published whole-network totals: (network, measured, predicted), in ms.
reference=[('AlexNet',561.64,526.75),('All-CNN-C',115.68,123.22),('MobileNet',943.73,908.74),('ResNet-18',1032.84,1049.10),
    ('SimpleNet',347.59,349.22),('SqueezeNet',348.15,343.54),('Tiny YOLO',1691.37,1740.03)]
for i,(n,m,p) in enumerate(reference):
    doc={"network":n,"target":"runtime","unit":"ms","c_used":1,"sum_layers":p,"network_total":p,"sum_measured":m,"per_layer":[],"hot_layers":[]}
    fn=f"{OUT}/reference_totals/{i+1:02d}_{n.lower().replace(' ','_').replace('-','_')}.json"
    open(fn,'w').write(json.dumps(doc,indent=2)+'\n')
    print(fn, round((p-m)/m*100,2))
